use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn klab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn klab_env(out: &Path, args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klab"))
        .env("KLAB_THREADS", threads)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status,
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v["value"]
        .as_f64()
        .unwrap_or_else(|| panic!("not a tagged number: {v}"))
}

const PROVENANCES: [&str; 5] = [
    "analytic",
    "eigensolve",
    "quadrature",
    "sampled",
    "regression-frozen",
];

/// Counts numbers in `v` that are not wrapped as `{value, provenance}`.
fn untagged(v: &Value) -> usize {
    match v {
        Value::Number(_) => 1,
        Value::Array(a) => a.iter().map(untagged).sum(),
        Value::Object(o)
            if o.len() == 2 && o.contains_key("value") && o.contains_key("provenance") =>
        {
            let p = o["provenance"].as_str().unwrap_or("");
            assert!(PROVENANCES.contains(&p), "unknown provenance {p}");
            usize::from(!o["value"].is_number())
        }
        Value::Object(o) => o.values().map(untagged).sum(),
        _ => 0,
    }
}

fn check_report(path: &Path, kind: &str) -> Value {
    let v = json(path);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["kind"], kind);
    assert_eq!(
        untagged(&v["results"]),
        0,
        "untagged numbers in {}",
        path.display()
    );
    v
}

#[test]
fn poincare_certificate_for_the_square() {
    let dir = tempfile::tempdir().unwrap();
    let d = data("square.json");
    let o = klab(
        dir.path(),
        &["poincare", "--domain", d.to_str().unwrap(), "--h", "0.125"],
    );
    ok(&o);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("constructive kappa") && stdout.contains("variational kappa"));
    let v = check_report(&dir.path().join("certificate.json"), "poincare");
    let cert = &v["results"]["certificate"];
    let var = num(&cert["variational_kappa"]["value"]);
    let con = num(&cert["constructive_kappa"]);
    assert!(var >= 1.0 && con >= var, "{con} vs {var}");
    assert_eq!(
        cert["variational_kappa"]["value"]["provenance"],
        "eigensolve"
    );
    for r in cert["regions"].as_array().unwrap() {
        assert_eq!(r["constant"]["provenance"], r["provenance"]);
        assert_eq!(r["stated_factor"]["provenance"], "analytic");
    }
}

#[test]
fn manufactured_square_converges() {
    let dir = tempfile::tempdir().unwrap();
    let p = data("manufactured_square.json");
    let o = klab(
        dir.path(),
        &["solve", "--problem", p.to_str().unwrap(), "--levels", "3"],
    );
    ok(&o);
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4, "{csv}");
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|h| *h == "l2_rate").unwrap();
    let rate: f64 = lines[3].split(',').nth(col).unwrap().parse().unwrap();
    assert!(rate >= 1.9, "L2 rate {rate}");
    check_report(&dir.path().join("convergence.json"), "convergence");
    check_report(&dir.path().join("solve.json"), "solve");
}

#[test]
fn missing_domain_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = klab(
        dir.path(),
        &[
            "poincare",
            "--domain",
            "no/such/domain.json",
            "--h",
            "0.125",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/domain.json"));
}

#[test]
fn schema_violations_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"schema_version": 1, "domain": {"shape": "l_shape"}, "mesh": {"h": "coarse"}}"#,
    )
    .unwrap();
    let o = klab(dir.path(), &["solve", "--problem", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("`mesh.h`"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    fs::write(&bad, r#"{"schema_version": 7, "shape": "unit_square"}"#).unwrap();
    let o = klab(
        dir.path(),
        &["domain", "validate", "--domain", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));

    fs::write(&bad, r#"{"schema_version": 1, "domain": {"shape": "l_shape"}, "mesh": {"h": 0.25}, "source": "foo(x)"}"#)
        .unwrap();
    let o = klab(dir.path(), &["solve", "--problem", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown function"));
}

#[test]
fn unknown_subcommand_and_bad_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(klab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let d = data("square.json");
    let o = klab_env(
        dir.path(),
        &["domain", "validate", "--domain", d.to_str().unwrap()],
        "zero",
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    fs::write(&p, r#"{"schema_version": 1, "domain": {"shape": "l_shape"}, "mesh": {"h": 0.25}, "source": "r^(-40)"}"#).unwrap();
    let o = klab(dir.path(), &["solve", "--problem", p.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let d = data("l_shape.json");
    let p = data("manufactured_square.json");
    let runs: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (
            vec![
                "poincare",
                "--domain",
                d.to_str().unwrap(),
                "--h",
                "0.25",
                "--fields",
                "10",
            ],
            vec!["certificate.json"],
        ),
        (
            vec!["solve", "--problem", p.to_str().unwrap(), "--levels", "2"],
            vec!["solve.json", "convergence.json", "convergence.csv"],
        ),
        (
            vec![
                "window-probe",
                "--domain",
                d.to_str().unwrap(),
                "--h",
                "0.25",
                "--grid",
                "0,0.5",
            ],
            vec!["window.json"],
        ),
    ];
    for (args, files) in runs {
        let outs: Vec<_> = ["1", "1", "3"]
            .iter()
            .map(|t| {
                let dir = tempfile::tempdir().unwrap();
                let mut a = args.clone();
                a.extend(["--seed", "11"]);
                ok(&klab_env(dir.path(), &a, t));
                dir
            })
            .collect();
        for f in &files {
            let first = fs::read(outs[0].path().join(f)).unwrap();
            for o in &outs[1..] {
                assert!(
                    first == fs::read(o.path().join(f)).unwrap(),
                    "{f} differs for {args:?}"
                );
            }
        }
    }
}

#[test]
fn seed_changes_random_field_check_only() {
    let d = data("square.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        ok(&klab(
            dir.path(),
            &[
                "poincare",
                "--domain",
                d.to_str().unwrap(),
                "--h",
                "0.25",
                "--fields",
                "5",
                "--seed",
                seed,
            ],
        ));
    }
    let (ra, rb) = (
        json(&a.path().join("certificate.json")),
        json(&b.path().join("certificate.json")),
    );
    assert_eq!(ra["results"]["certificate"], rb["results"]["certificate"]);
    assert_ne!(
        ra["results"]["hardy_check"]["max_ratio"],
        rb["results"]["hardy_check"]["max_ratio"]
    );
    assert_eq!(ra["results"]["hardy_check"]["passed"], true);
}

#[test]
fn mesh_build_refine_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let d = data("l_shape.json");
    let d = d.to_str().unwrap();
    ok(&klab(
        dir.path(),
        &["mesh", "build", "--domain", d, "--h", "0.25"],
    ));
    let v = check_report(&dir.path().join("mesh.json"), "mesh");
    let nodes = num(&v["results"]["mesh"]["nodes"]);
    let mesh = dir.path().join("mesh.kmesh");
    let fine = dir.path().join("fine");
    ok(&klab(
        &fine,
        &[
            "mesh",
            "refine",
            "--domain",
            d,
            "--mesh",
            mesh.to_str().unwrap(),
        ],
    ));
    let v = check_report(&fine.join("mesh.json"), "mesh");
    assert!(num(&v["results"]["mesh"]["nodes"]) > 3.0 * nodes);

    ok(&klab(
        dir.path(),
        &[
            "weights",
            "dump",
            "--domain",
            d,
            "--mesh",
            mesh.to_str().unwrap(),
        ],
    ));
    let csv = fs::read_to_string(dir.path().join("weights.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("node_id,x,y,eta,r_omega"));
    let mut rows = 0;
    for l in lines {
        let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[4] <= f[3] + 1e-15 && f[4] >= 0.5 * f[3] - 1e-15, "{l}");
        rows += 1;
    }
    assert_eq!(rows as f64, nodes);

    ok(&klab(
        dir.path(),
        &[
            "weights",
            "certify",
            "--domain",
            d,
            "--h",
            "0.25",
            "--samples",
            "500",
        ],
    ));
    let v = check_report(&dir.path().join("weights.json"), "weights-certify");
    let eq = &v["results"]["equivalence"];
    assert_eq!(eq["c"]["provenance"], "sampled");
    assert!(num(&eq["c"]) >= 0.5 && num(&eq["big_c"]) <= 1.0);
}

#[test]
fn domain_and_norm_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = data("pentagon.json");
    ok(&klab(
        dir.path(),
        &["domain", "validate", "--domain", d.to_str().unwrap()],
    ));
    let v = check_report(&dir.path().join("domain.json"), "domain");
    assert_eq!(
        v["results"]["domain"]["vertices"].as_array().unwrap().len(),
        5
    );

    let sq = data("square.json");
    ok(&klab(
        dir.path(),
        &[
            "norm",
            "--domain",
            sq.to_str().unwrap(),
            "--h",
            "0.25",
            "--field",
            "1",
            "--mu",
            "0",
            "--a",
            "0",
        ],
    ));
    let v = check_report(&dir.path().join("norm.json"), "norm");
    assert!((num(&v["results"]["norm"]["value"]) - 1.0).abs() < 1e-12);

    let l = data("l_shape.json");
    let args = [
        "norm",
        "--domain",
        l.to_str().unwrap(),
        "--h",
        "0.25",
        "--field",
        "r^(2/3)*sin(2*theta/3)",
        "--trace",
    ];
    ok(&klab(dir.path(), &args));
    let v = check_report(&dir.path().join("norm.json"), "norm");
    assert!(
        num(&v["results"]["trace"]["value"]) <= num(&v["results"]["norm"]["value"]) * (1.0 + 1e-12)
    );
}

#[test]
fn regularity_and_window_commands() {
    let dir = tempfile::tempdir().unwrap();
    let p = data("l_shape_corner.json");
    ok(&klab(
        dir.path(),
        &[
            "regularity-study",
            "--problem",
            p.to_str().unwrap(),
            "--levels",
            "2",
        ],
    ));
    let csv = fs::read_to_string(dir.path().join("regularity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    check_report(&dir.path().join("regularity.json"), "regularity-study");

    let sq = data("square.json");
    ok(&klab(
        dir.path(),
        &[
            "window-probe",
            "--domain",
            sq.to_str().unwrap(),
            "--h",
            "0.25",
            "--grid=-1,0,1",
        ],
    ));
    let v = check_report(&dir.path().join("window.json"), "window-probe");
    let w = &v["results"]["window"];
    assert_eq!(w["onset"], Value::Null);
    assert!((num(&w["predicted"]) - 2.0).abs() < 1e-12);
    assert_eq!(w["predicted"]["provenance"], "analytic");
}
