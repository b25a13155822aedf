use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use klab_core::expr::Expr;
use klab_core::fem::{FemField, QuadPolicy, ScalarFn, VectorFn};
use klab_core::mesh::io::{read_mesh, write_mesh};
use klab_core::mesh::{refine, triangulate};
use klab_core::numeric::par_map_range;
use klab_core::poincare::{build_decomposition, constructive_kappa};
use klab_core::report::{self, Provenance, Report};
use klab_core::sobolev::{k_norm, trace, trace_norm_surrogate, NormSpec};
use klab_core::weights::{certify_equivalence, eta, WeightField};
use klab_core::wellposed::{
    convergence_study, regularity_ratio, solve_dirichlet, weight_window_probe, BvpProblem, Data,
};
use klab_core::{Error, GradingSpec, Point, Polyhedron, Result, SimplicialMesh};
use serde::Serialize;

use crate::spec::{load_domain, load_problem, DomainSpec, Problem, ProblemFile};
use crate::{render, Cli, Command, DomainCmd, MeshArgs, MeshCmd, WeightKind, WeightsCmd};

#[derive(Serialize)]
struct Config<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    args: &'a T,
    /// Parsed domain, so reports stay meaningful without the input files.
    domain: &'a DomainSpec,
}

#[derive(Serialize)]
struct StudyConfig<'a> {
    command: &'a str,
    problem_path: &'a Path,
    levels: usize,
    problem: &'a ProblemFile,
    domain: &'a DomainSpec,
}

fn write(out: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let path = out.join(name);
    fs::write(&path, content).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_report(out: &Path, name: &str, r: &Report) -> Result<PathBuf> {
    write(out, name, &r.to_json())
}

fn mesh_from_args(domain: &Polyhedron, a: &MeshArgs) -> Result<SimplicialMesh> {
    let base = match (&a.mesh, a.h) {
        (Some(path), _) => {
            let mut m = read_mesh(path)?;
            m.attach_domain(domain)?;
            m
        }
        (None, Some(h)) => triangulate(domain, h)?,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "either --h or --mesh is required".into(),
            ))
        }
    };
    refine(&base, &GradingSpec::new(a.kappa, a.levels)?, domain)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::Domain(DomainCmd::Validate(args)) => {
            let (spec, p) = load_domain(&args.domain)?;
            let cfg = Config {
                command: "domain validate",
                seed: cli.seed,
                args,
                domain: &spec,
            };
            write_report(out, "domain.json", &report::domain_report(&p, &cfg)?)?;
            println!(
                "valid {}D domain: {} vertices, {} edges, measure {}",
                p.dim(),
                p.num_vertices(),
                p.edges().len(),
                p.measure()
            );
            Ok(())
        }
        Command::Mesh(MeshCmd::Build(args)) => {
            let (spec, p) = load_domain(&args.domain.domain)?;
            let m = mesh_from_args(&p, args)?;
            let cfg = Config {
                command: "mesh build",
                seed: cli.seed,
                args,
                domain: &spec,
            };
            finish_mesh(out, &m, &report::mesh_report(&m, &cfg)?)
        }
        Command::Mesh(MeshCmd::Refine(args)) => {
            let (spec, p) = load_domain(&args.domain.domain)?;
            let mut m = read_mesh(&args.mesh)?;
            m.attach_domain(&p)?;
            let m = refine(&m, &GradingSpec::new(args.kappa, args.levels)?, &p)?;
            let cfg = Config {
                command: "mesh refine",
                seed: cli.seed,
                args,
                domain: &spec,
            };
            finish_mesh(out, &m, &report::mesh_report(&m, &cfg)?)
        }
        Command::Weights(WeightsCmd::Dump(args)) => {
            let (_, p) = load_domain(&args.domain.domain)?;
            let m = mesh_from_args(&p, args)?;
            write(out, "weights.csv", &weights_csv(&p, &m)?)?;
            Ok(())
        }
        Command::Weights(WeightsCmd::Certify(args)) => {
            let (spec, p) = load_domain(&args.mesh.domain.domain)?;
            let m = mesh_from_args(&p, &args.mesh)?;
            let eq = certify_equivalence(&p, &m, args.samples)?;
            let cfg = Config {
                command: "weights certify",
                seed: cli.seed,
                args,
                domain: &spec,
            };
            write_report(
                out,
                "weights.json",
                &report::equivalence_report(&m, &eq, &cfg)?,
            )?;
            println!(
                "r_omega/eta in [{}, {}] over {} samples",
                eq.c, eq.big_c, eq.samples
            );
            Ok(())
        }
        Command::Norm(args) => {
            let (spec, p) = load_domain(&args.mesh.domain.domain)?;
            let m = mesh_from_args(&p, &args.mesh)?;
            let e = Expr::parse(&args.field, &p, args.anchor)?;
            let values = m
                .nodes()
                .iter()
                .map(|x| e.eval(x))
                .collect::<Result<Vec<_>>>()?;
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "field `{}` is not finite at node {}",
                    args.field,
                    i + 1
                )));
            }
            let w = match args.weight {
                WeightKind::Eta => WeightField::eta(&p),
                WeightKind::ROmega => WeightField::r_omega(&p, &m)?,
            };
            let u = FemField::new(&m, values)?;
            let norm = k_norm(&u, NormSpec::domain(args.mu, args.a), &w)?;
            let cfg = Config {
                command: "norm",
                seed: cli.seed,
                args,
                domain: &spec,
            };
            let mut r = report::norm_report(&m, &norm, &cfg)?;
            if args.trace {
                #[derive(Serialize)]
                struct TraceSummary {
                    value: f64,
                    iterations: usize,
                }
                let ext = trace_norm_surrogate(&trace(&u), &m, &w)?;
                let s = TraceSummary {
                    value: ext.value,
                    iterations: ext.iterations,
                };
                r = r.section("trace", &s, Provenance::Quadrature, &[])?;
            }
            write_report(out, "norm.json", &r)?;
            println!("||u||_(K^{}_{}) = {}", args.mu, args.a, norm.value);
            Ok(())
        }
        Command::Poincare(args) => poincare(cli, args),
        Command::Solve(args) => solve(cli, args),
        Command::RegularityStudy(args) => regularity(cli, args),
        Command::WindowProbe(args) => {
            let (spec, p) = load_domain(&args.mesh.domain.domain)?;
            let m = mesh_from_args(&p, &args.mesh)?;
            let est = weight_window_probe(&p, &m, &args.grid)?;
            let cfg = Config {
                command: "window-probe",
                seed: cli.seed,
                args,
                domain: &spec,
            };
            write_report(out, "window.json", &report::window_report(&m, &est, &cfg)?)?;
            print!("{}", render::window(&est));
            Ok(())
        }
    }
}

fn finish_mesh(out: &Path, m: &SimplicialMesh, r: &Report) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let path = out.join("mesh.kmesh");
    write_mesh(m, &path)?;
    println!("wrote {}", path.display());
    write_report(out, "mesh.json", r)?;
    println!(
        "{} nodes, {} elements, min angle {:.4} rad",
        m.num_nodes(),
        m.num_elements(),
        m.min_angle()
    );
    Ok(())
}

fn weights_csv(p: &Polyhedron, m: &SimplicialMesh) -> Result<String> {
    let r = WeightField::r_omega(p, m)?;
    let mut s = String::from(if p.dim() == 2 {
        "node_id,x,y,eta,r_omega\n"
    } else {
        "node_id,x,y,z,eta,r_omega\n"
    });
    for (i, x) in m.nodes().iter().enumerate() {
        let (e, ro) = (eta(p, x)?, r.eval(x)?);
        if p.dim() == 2 {
            let _ = writeln!(s, "{},{},{},{},{}", i + 1, x.x, x.y, e, ro);
        } else {
            let _ = writeln!(s, "{},{},{},{},{},{}", i + 1, x.x, x.y, x.z, e, ro);
        }
    }
    Ok(s)
}

fn poincare(cli: &Cli, args: &crate::PoincareArgs) -> Result<()> {
    check_positive("--slack", args.slack)?;
    let (spec, p) = load_domain(&args.mesh.domain.domain)?;
    let m = mesh_from_args(&p, &args.mesh)?;
    let dec = build_decomposition(&p)?;
    let cert = constructive_kappa(&p, &dec, &m)?;
    let cfg = Config {
        command: "poincare",
        seed: cli.seed,
        args,
        domain: &spec,
    };
    let mut r = report::poincare_report(&m, &cert, &cfg)?;
    let mut failure = (!cert.passed).then(|| {
        format!(
            "variational kappa {} exceeds constructive kappa {} beyond slack {}",
            cert.variational_kappa.value, cert.constructive_kappa, cert.slack
        )
    });
    if args.fields > 0 {
        #[derive(Serialize)]
        struct HardyCheck {
            fields: usize,
            /// Largest `||u||^2_{K^1_1} / int |grad u|^2` over the fields.
            max_ratio: f64,
            kappa: f64,
            slack: f64,
            passed: bool,
        }
        let eta_w = WeightField::eta(&p);
        let ratios = par_map_range(args.fields, |i| -> Result<f64> {
            let u = FemField::random_zero_trace(
                &m,
                cli.seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64),
            );
            let n = k_norm(&u, NormSpec::domain(1, 1.0), &eta_w)?;
            let grad2: f64 = n
                .terms
                .iter()
                .filter(|t| t.alpha.iter().any(|&a| a > 0))
                .map(|t| t.value * t.value)
                .sum();
            Ok(n.value * n.value / grad2)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        let kappa = cert.variational_kappa.value;
        let passed = max_ratio <= kappa * (1.0 + args.slack);
        if !passed && failure.is_none() {
            failure = Some(format!(
                "random field ratio {max_ratio} exceeds variational kappa {kappa}"
            ));
        }
        let check = HardyCheck {
            fields: args.fields,
            max_ratio,
            kappa,
            slack: args.slack,
            passed,
        };
        r = r.section(
            "hardy_check",
            &check,
            Provenance::Sampled,
            &[("kappa", Provenance::Eigensolve)],
        )?;
    }
    write_report(out_dir(cli), "certificate.json", &r)?;
    print!("{}", render::certificate(&cert));
    match failure {
        Some(msg) => Err(Error::Certificate(msg)),
        None => Ok(()),
    }
}

fn out_dir(cli: &Cli) -> &Path {
    cli.out.as_path()
}

fn data(src: &str, p: &Polyhedron, anchor: usize) -> Result<Data> {
    Ok(if src.trim() == "0" {
        Data::Zero
    } else {
        Data::Expr(Expr::parse(src, p, anchor)?)
    })
}

struct Loaded {
    prob: Problem,
    levels: usize,
    f: Data,
    g: Data,
    meshes: Vec<SimplicialMesh>,
}

fn load_study(args: &crate::StudyArgs) -> Result<Loaded> {
    let prob = load_problem(&args.problem)?;
    let levels = args.levels.unwrap_or(prob.file.levels);
    if levels == 0 {
        return Err(Error::InvalidArgument("--levels must be at least 1".into()));
    }
    let pf = &prob.file;
    let f = data(&pf.source, &prob.domain, pf.anchor_vertex)?;
    let g = data(&pf.boundary, &prob.domain, pf.anchor_vertex)?;
    let base = triangulate(&prob.domain, pf.mesh.h)?;
    let meshes = (0..levels)
        .map(|k| {
            refine(
                &base,
                &GradingSpec::new(pf.mesh.kappa, pf.mesh.levels + k)?,
                &prob.domain,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Loaded {
        prob,
        levels,
        f,
        g,
        meshes,
    })
}

fn problem_on<'m>(l: &Loaded, m: &'m SimplicialMesh) -> BvpProblem<'m> {
    let pf = &l.prob.file;
    BvpProblem::new(&l.prob.domain, m)
        .source(l.f.clone())
        .boundary(l.g.clone())
        .index(pf.a)
        .sign(pf.equation)
        .order(pf.order)
}

/// Exact solution and gradient; central differences when no gradient is given.
fn exact_pair(prob: &Problem) -> Result<Option<(Expr, Vec<Expr>, bool)>> {
    let pf = &prob.file;
    let Some(src) = &pf.exact else {
        return Ok(None);
    };
    let e = Expr::parse(src, &prob.domain, pf.anchor_vertex)?;
    match &pf.exact_gradient {
        Some(g) => {
            if g.len() != prob.domain.dim() {
                return Err(Error::Schema {
                    path: "exact_gradient".into(),
                    msg: format!("expected {} components, got {}", prob.domain.dim(), g.len()),
                });
            }
            let g = g
                .iter()
                .map(|s| Expr::parse(s, &prob.domain, pf.anchor_vertex))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some((e, g, false)))
        }
        None => Ok(Some((e, Vec::new(), true))),
    }
}

fn solve(cli: &Cli, args: &crate::StudyArgs) -> Result<()> {
    let l = load_study(args)?;
    let exact = exact_pair(&l.prob)?;
    if l.levels > 1 && exact.is_none() {
        return Err(Error::Schema {
            path: "exact".into(),
            msg: "a study over several meshes needs the exact solution".into(),
        });
    }
    let cfg = StudyConfig {
        command: "solve",
        problem_path: &args.problem,
        levels: l.levels,
        problem: &l.prob.file,
        domain: &l.prob.domain_spec,
    };
    let finest = l.meshes.last().expect("at least one level");
    let rep = solve_dirichlet(&problem_on(&l, finest))?;
    write_report(
        out_dir(cli),
        "solve.json",
        &report::solve_report(finest, &rep, &cfg)?,
    )?;
    println!(
        "{}: {} nodes, {} iterations ({:?}), residual {:.2e}",
        rep.equation,
        finest.num_nodes(),
        rep.iterations,
        rep.solver,
        rep.residual
    );
    if let Some((e, grad, fd)) = exact {
        let step = 1e-6 * l.prob.domain.diameter();
        let dim = l.prob.domain.dim();
        let exact_fn = |x: &Point| e.eval(x);
        let grad_fn = |x: &Point| -> Result<Point> {
            let mut g = Point::zeros();
            for k in 0..dim {
                g[k] = if fd {
                    let mut d = Point::zeros();
                    d[k] = step;
                    (e.eval(&(x + d))? - e.eval(&(x - d))?) / (2.0 * step)
                } else {
                    grad[k].eval(x)?
                };
            }
            Ok(g)
        };
        let table = convergence_study(
            &l.meshes,
            |m| problem_on(&l, m),
            &exact_fn as &ScalarFn,
            &grad_fn as &VectorFn,
        )?;
        #[derive(Serialize)]
        struct GradientSource<'a> {
            exact_gradient: &'a str,
            quadrature_degree: usize,
            singular_quadrature_degree: usize,
        }
        let q = QuadPolicy::default();
        let src = GradientSource {
            exact_gradient: if fd {
                "central differences"
            } else {
                "closed form"
            },
            quadrature_degree: q.regular,
            singular_quadrature_degree: q.singular,
        };
        let r = report::convergence_report(&table, &cfg)?.section(
            "method",
            &src,
            Provenance::Analytic,
            &[],
        )?;
        write(out_dir(cli), "convergence.csv", &table.to_csv())?;
        write_report(out_dir(cli), "convergence.json", &r)?;
        print!("{}", render::convergence(&table));
    }
    Ok(())
}

#[derive(Serialize)]
struct RegularityRow {
    h: f64,
    nodes: usize,
    ratio: Option<f64>,
    solution_norm: f64,
    source_norm: f64,
    boundary_norm: f64,
    solution_l2: f64,
}

fn regularity(cli: &Cli, args: &crate::StudyArgs) -> Result<()> {
    let l = load_study(args)?;
    let results = par_map_range(l.meshes.len(), |i| {
        regularity_ratio(&problem_on(&l, &l.meshes[i]))
    });
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (m, r) in l.meshes.iter().zip(results) {
        let r = r?;
        notes.extend(r.note);
        rows.push(RegularityRow {
            h: m.max_diameter(),
            nodes: m.num_nodes(),
            ratio: r.value,
            solution_norm: r.norms.solution,
            source_norm: r.norms.source,
            boundary_norm: r.norms.boundary,
            solution_l2: r.norms.solution_l2,
        });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let drift = (!ratios.is_empty()).then(|| {
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        (hi - lo) / lo
    });
    #[derive(Serialize)]
    struct Summary {
        /// `(max - min) / min` of the ratio over the sequence.
        drift: Option<f64>,
        notes: Vec<String>,
    }
    let cfg = StudyConfig {
        command: "regularity-study",
        problem_path: &args.problem,
        levels: l.levels,
        problem: &l.prob.file,
        domain: &l.prob.domain_spec,
    };
    let r = Report::new("regularity-study", &cfg)?
        .section(
            "rows",
            &rows,
            Provenance::Quadrature,
            &[("h", Provenance::Analytic), ("nodes", Provenance::Analytic)],
        )?
        .section(
            "summary",
            &Summary { drift, notes },
            Provenance::Quadrature,
            &[],
        )?;
    let mut csv =
        String::from("h,nodes,ratio,solution_norm,source_norm,boundary_norm,solution_l2\n");
    for r in &rows {
        let ratio = r.ratio.map(|v| format!("{v:.9e}")).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{:.9e},{},{},{:.9e},{:.9e},{:.9e},{:.9e}",
            r.h, r.nodes, ratio, r.solution_norm, r.source_norm, r.boundary_norm, r.solution_l2
        );
    }
    write(out_dir(cli), "regularity.csv", &csv)?;
    write_report(out_dir(cli), "regularity.json", &r)?;
    print!("{csv}");
    if let Some(d) = drift {
        println!("drift {:.2}%", 100.0 * d);
    }
    Ok(())
}
