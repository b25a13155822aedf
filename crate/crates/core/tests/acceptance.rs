//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach the
//! terminal. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use klab_core::fem::{assemble_stiffness, element_geometry, ElementRules, FemField, QuadPolicy};
use klab_core::geometry::SphericalPolygon;
use klab_core::mesh::{refine, refine_uniform, triangulate};
use klab_core::poincare::{
    build_decomposition, cap_constant, constructive_kappa, sector_constant, sector_constant_fem,
    variational_kappa, Provenance, RegionKind, SECTOR_FEM_CELLS,
};
use klab_core::report::{poincare_report, solve_report, window_report};
use klab_core::sobolev::{k_norm, trace, trace_norm_surrogate, BoundaryField, NormSpec};
use klab_core::weights::{certify_equivalence, WeightField};
use klab_core::wellposed::{
    bump_basis, conjugation_lipschitz, convergence_study, mapping_study, regularity_ratio,
    solve_dirichlet, weight_window_probe, BvpProblem, Data,
};
use klab_core::{Generator, GradingSpec, Point, Polyhedron, SimplicialMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// Pinned tolerances.
const C1_L2_RATE: f64 = 1.9;
const C1_H1_RATE: f64 = 0.95;
const C1_RUNTIME: Duration = Duration::from_secs(60);
const C2_UNIFORM_RATE: (f64, f64) = (0.6, 0.75);
const C2_GRADING_GAIN: f64 = 0.15;
const C2_DRIFT: f64 = 0.25;
const C3_SLACK: f64 = 1e-8;
const C3_LAST_INCREMENT: f64 = 0.05;
const C5_REL: f64 = 1e-3;
const C6_REL: f64 = 0.02;
const C7_3D: (f64, f64) = (0.1, 10.0);
const C7_2D: (f64, f64) = (0.5, 1.0);
const C8_BRACKET: f64 = 0.1;
const C9_CHANGE: f64 = 0.3;
const C9_LIPSCHITZ: f64 = 0.5023802615487895;
const C9_LIPSCHITZ_TOL: f64 = 1e-6;
const FIELDS: u64 = 100;

/// Collects named conditions with the numbers behind them.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.failures.push(what.clone());
        }
        self.notes.push(what);
    }
}

fn drift(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0, f64::max);
    (hi - lo) / lo
}

fn nested(first: SimplicialMesh, p: &Polyhedron, n: usize) -> Vec<SimplicialMesh> {
    let mut out = vec![first];
    while out.len() < n {
        let mut m = refine_uniform(out.last().unwrap()).unwrap();
        m.attach_domain(p).unwrap();
        out.push(m);
    }
    out
}

fn corner_solution(x: &Point) -> f64 {
    let r = x.norm();
    let t = x.y.atan2(x.x).rem_euclid(2.0 * PI);
    r.powf(2.0 / 3.0) * (2.0 * t / 3.0).sin()
}

fn corner_gradient(x: &Point) -> Point {
    let r = x.norm();
    if r == 0.0 {
        return Point::zeros();
    }
    let t = x.y.atan2(x.x).rem_euclid(2.0 * PI);
    let c = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
    Point::new(c * (-t / 3.0).sin(), c * (-t / 3.0).cos(), 0.0)
}

/// Quintic step from 1 on `r <= 0.2` to 0 on `r >= 0.9`: value and two derivatives.
fn cutoff(r: f64) -> (f64, f64, f64) {
    let (r0, r1) = (0.2, 0.9);
    if r <= r0 {
        return (1.0, 0.0, 0.0);
    }
    if r >= r1 {
        return (0.0, 0.0, 0.0);
    }
    let d = r1 - r0;
    let s = (r - r0) / d;
    (
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s),
        -30.0 * s * s * (1.0 - s) * (1.0 - s) / d,
        -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (d * d),
    )
}

fn cutoff_solution(x: &Point) -> f64 {
    cutoff(x.norm()).0 * corner_solution(x)
}

fn cutoff_gradient(x: &Point) -> Point {
    let r = x.norm();
    let (c, c1, _) = cutoff(r);
    let radial = if r > 0.0 {
        *x * (c1 * corner_solution(x) / r)
    } else {
        Point::zeros()
    };
    radial + corner_gradient(x) * c
}

fn cutoff_source(x: &Point) -> f64 {
    let r = x.norm();
    let (_, c1, c2) = cutoff(r);
    if c1 == 0.0 && c2 == 0.0 {
        return 0.0;
    }
    let t = x.y.atan2(x.x).rem_euclid(2.0 * PI);
    let dr = 2.0 / 3.0 * r.powf(-1.0 / 3.0) * (2.0 * t / 3.0).sin();
    -(c2 + c1 / r) * corner_solution(x) - 2.0 * c1 * dr
}

/// `||v||_{K^2_1}` of the cut-off singular function from its exact values and
/// gradients, with the Hessian by central differences of the gradient.
fn cutoff_k21_reference(m: &SimplicialMesh, w: &WeightField) -> f64 {
    let rules = ElementRules::new(2, QuadPolicy::default()).unwrap();
    let h = 1e-6;
    let dx = Point::new(h, 0.0, 0.0);
    let dy = Point::new(0.0, h, 0.0);
    let mut acc = 0.0;
    for e in 0..m.num_elements() {
        let g = element_geometry(&m.element_points(e));
        for (x, _, wq) in rules.points(m, e, &g) {
            let eta = w.eval(&x).unwrap();
            let gx = (cutoff_gradient(&(x + dx)) - cutoff_gradient(&(x - dx))) / (2.0 * h);
            let gy = (cutoff_gradient(&(x + dy)) - cutoff_gradient(&(x - dy))) / (2.0 * h);
            let hess = gx.x * gx.x + 0.25 * (gx.y + gy.x).powi(2) + gy.y * gy.y;
            let v = cutoff_solution(&x);
            acc +=
                wq * (v * v / (eta * eta) + cutoff_gradient(&x).norm_squared() + eta * eta * hess);
        }
    }
    acc.sqrt()
}

fn untagged_numbers(v: &Value, inside_tag: bool) -> usize {
    match v {
        Value::Number(_) => usize::from(!inside_tag),
        Value::Array(a) => a.iter().map(|x| untagged_numbers(x, false)).sum(),
        Value::Object(o) => {
            let is_tag = o.len() == 2 && o.contains_key("value") && o.contains_key("provenance");
            o.values().map(|x| untagged_numbers(x, is_tag)).sum()
        }
        _ => 0,
    }
}

fn manufactured_convergence(c: &mut Check) {
    let sq = Polyhedron::unit_square();
    let start = Instant::now();
    let base = triangulate(&sq, 0.125).unwrap();
    let meshes: Vec<_> = (0..4)
        .map(|k| refine(&base, &GradingSpec::uniform(k), &sq).unwrap())
        .collect();
    let f = Data::function(|x: &Point| 2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin());
    let t = convergence_study(
        &meshes,
        |m| BvpProblem::new(&sq, m).source(f.clone()),
        &|x| Ok((PI * x.x).sin() * (PI * x.y).sin()),
        &|x| {
            Ok(Point::new(
                PI * (PI * x.x).cos() * (PI * x.y).sin(),
                PI * (PI * x.x).sin() * (PI * x.y).cos(),
                0.0,
            ))
        },
    )
    .unwrap();
    let elapsed = start.elapsed();
    let l2 = t.last_l2_rate().unwrap();
    let h1 = t.last_h1_rate().unwrap();
    c.require(t.rows.len() == 4, format!("{} meshes", t.rows.len()));
    c.require(l2 >= C1_L2_RATE, format!("L2 rate {l2:.4} >= {C1_L2_RATE}"));
    c.require(h1 >= C1_H1_RATE, format!("H1 rate {h1:.4} >= {C1_H1_RATE}"));
    c.require(
        elapsed < C1_RUNTIME,
        format!("study {:.2}s < 60s", elapsed.as_secs_f64()),
    );
}

fn corner_regularity(c: &mut Check) {
    let l = Polyhedron::l_shape();
    let base = triangulate(&l, 0.125).unwrap();
    let g = Data::function(corner_solution);
    let exact = |x: &Point| Ok(corner_solution(x));
    let grad = |x: &Point| Ok(corner_gradient(x));
    let uniform: Vec<_> = (0..4)
        .map(|k| refine(&base, &GradingSpec::uniform(k), &l).unwrap())
        .collect();
    let graded: Vec<_> = (0..4)
        .map(|k| refine(&base, &GradingSpec::new(0.5, k).unwrap(), &l).unwrap())
        .collect();
    let tu = convergence_study(
        &uniform,
        |m| BvpProblem::new(&l, m).boundary(g.clone()),
        &exact,
        &grad,
    )
    .unwrap();
    let tg = convergence_study(
        &graded,
        |m| BvpProblem::new(&l, m).boundary(g.clone()),
        &exact,
        &grad,
    )
    .unwrap();
    let ru = tu.last_h1_rate().unwrap();
    let ru_nodes = tu.rows.last().unwrap().h1_rate_nodes.unwrap();
    let rg_nodes = tg.rows.last().unwrap().h1_rate_nodes.unwrap();
    c.require(
        (C2_UNIFORM_RATE.0..=C2_UNIFORM_RATE.1).contains(&ru),
        format!(
            "(a) uniform H1 rate {ru:.4} in [{}, {}]",
            C2_UNIFORM_RATE.0, C2_UNIFORM_RATE.1
        ),
    );
    c.require(
        rg_nodes - ru_nodes >= C2_GRADING_GAIN,
        format!("(b) graded {rg_nodes:.4} - uniform {ru_nodes:.4} >= {C2_GRADING_GAIN}"),
    );

    let w = WeightField::eta(&l);
    let f = Data::function(cutoff_source);
    let fine = refine(&base, &GradingSpec::new(0.3, 3).unwrap(), &l).unwrap();
    let reference = cutoff_k21_reference(&fine, &w);
    let norms: Vec<f64> = uniform
        .iter()
        .map(|m| {
            regularity_ratio(&BvpProblem::new(&l, m).source(f.clone()))
                .unwrap()
                .norms
                .solution
        })
        .collect();
    let d = drift(&norms);
    c.require(
        norms.iter().all(|n| n.is_finite()),
        format!("(c) K21 norms {norms:.4?}"),
    );
    c.require(d < C2_DRIFT, format!("(c) drift {:.2}% < 25%", 100.0 * d));
    let last = (norms[3] - reference).abs() / reference;
    c.require(
        last < 0.01,
        format!(
            "(c) finest vs quadrature reference {reference:.4}: {:.2}%",
            100.0 * last
        ),
    );
}

fn hardy_poincare(c: &mut Check) {
    for (name, p) in [
        ("L-shape", Polyhedron::l_shape()),
        ("unit box", Polyhedron::unit_box()),
    ] {
        let m = triangulate(&p, 0.125).unwrap();
        let w = WeightField::eta(&p);
        let kv = variational_kappa(&m, &w).unwrap().value;
        let k = assemble_stiffness(&m);
        let mut worst = f64::NEG_INFINITY;
        for seed in 0..FIELDS {
            let u = FemField::random_zero_trace(&m, seed);
            let lhs = k_norm(&u, NormSpec::domain(1, 1.0), &w)
                .unwrap()
                .value
                .powi(2);
            let rhs = kv * k.form(u.values(), u.values());
            worst = worst.max(lhs / rhs - 1.0);
        }
        c.require(
            worst <= C3_SLACK,
            format!("{name}: max(lhs/rhs - 1) = {worst:.3e} over {FIELDS} fields"),
        );
    }
    let l = Polyhedron::l_shape();
    let graded = refine(
        &triangulate(&l, 0.125).unwrap(),
        &GradingSpec::new(0.5, 1).unwrap(),
        &l,
    )
    .unwrap();
    let b = Polyhedron::unit_box();
    for (name, p, meshes) in [
        ("L-shape", &l, nested(graded, &l, 3)),
        (
            "unit box",
            &b,
            nested(triangulate(&b, 0.25).unwrap(), &b, 3),
        ),
    ] {
        let w = WeightField::eta(p);
        let k: Vec<f64> = meshes
            .iter()
            .map(|m| variational_kappa(m, &w).unwrap().value)
            .collect();
        let inc = (k[2] - k[1]) / k[1];
        c.require(
            k.windows(2).all(|s| s[1] >= s[0]),
            format!("{name}: kappa_var {k:.4?} nondecreasing"),
        );
        c.require(
            inc < C3_LAST_INCREMENT,
            format!("{name}: last increment {:.2}% < 5%", 100.0 * inc),
        );
    }
}

fn constructive_vs_variational(c: &mut Check) {
    // Frozen from the first certified runs at h = 1/8.
    for (name, p, kc_frozen, kv_frozen) in [
        (
            "L-shape",
            Polyhedron::l_shape(),
            4.8946738262599165,
            1.8741492864129157,
        ),
        (
            "unit box",
            Polyhedron::unit_box(),
            4.952120963351842,
            1.2313063131047395,
        ),
    ] {
        let d = build_decomposition(&p).unwrap();
        let m = triangulate(&p, 0.125).unwrap();
        let cert = constructive_kappa(&p, &d, &m).unwrap();
        let (kc, kv) = (cert.constructive_kappa, cert.variational_kappa.value);
        c.require(
            cert.passed && kc >= kv,
            format!("{name}: constructive {kc:.4} >= variational {kv:.4}"),
        );
        c.require(
            (kc - kc_frozen).abs() < 1e-9 * kc_frozen && (kv - kv_frozen).abs() < 1e-9 * kv_frozen,
            format!("{name}: matches frozen values"),
        );
        let tagged = cert.regions.iter().all(|r| match r.kind {
            RegionKind::VertexBall => r.provenance == Provenance::Eigensolve,
            _ => r.provenance == Provenance::Analytic,
        });
        c.require(
            tagged && !cert.regions.is_empty(),
            format!("{name}: {} regions with provenance", cert.regions.len()),
        );
        let json: Value =
            serde_json::from_str(&poincare_report(&m, &cert, &"acceptance").unwrap().to_json())
                .unwrap();
        let untagged = untagged_numbers(&json["results"], false);
        c.require(
            untagged == 0,
            format!("{name}: {untagged} untagged numbers in the report"),
        );
    }
}

fn sector_oracle(c: &mut Check) {
    for theta in [PI / 2.0, PI, 1.5 * PI] {
        let lambda_h = 1.0 / sector_constant_fem(theta, SECTOR_FEM_CELLS).unwrap();
        let lambda = (PI / theta).powi(2);
        let rel = (lambda_h / lambda - 1.0).abs();
        c.require(
            rel < C5_REL,
            format!(
                "theta = {:.3}pi: lambda_h {lambda_h:.6} vs {lambda:.6} ({rel:.1e})",
                theta / PI
            ),
        );
        c.require(
            sector_constant(theta).unwrap() == 1.0 / lambda,
            format!("theta = {:.3}pi: closed form", theta / PI),
        );
    }
    let l = Polyhedron::l_shape();
    let cert = constructive_kappa(
        &l,
        &build_decomposition(&l).unwrap(),
        &triangulate(&l, 0.125).unwrap(),
    )
    .unwrap();
    for r in cert
        .regions
        .iter()
        .filter(|r| r.kind != RegionKind::VertexBall)
    {
        let (theta, stated, check) = (
            r.theta.unwrap(),
            r.stated_factor.unwrap(),
            r.cross_check.unwrap(),
        );
        // The stated one-dimensional factor is pi/theta; the eigenvalue is its square.
        c.require(
            (stated - PI / theta).abs() < 1e-15
                && (stated * stated * r.constant - 1.0).abs() < 1e-12,
            format!(
                "{}: stated {stated:.4}, eigenvalue {:.4}",
                r.label,
                1.0 / r.constant
            ),
        );
        c.require(
            (check / r.constant - 1.0).abs() < C5_REL,
            format!("{}: cross-check recorded", r.label),
        );
    }
}

fn spherical_cap(c: &mut Check) {
    let half = cap_constant(&SphericalPolygon::hemisphere()).unwrap();
    let oct = cap_constant(&SphericalPolygon::octant()).unwrap();
    let rel = (half.lambda1 / 2.0 - 1.0).abs();
    c.require(
        rel < C6_REL,
        format!(
            "hemisphere lambda1 {:.5} vs 2 ({:.2}%)",
            half.lambda1,
            100.0 * rel
        ),
    );
    c.require(
        oct.lambda1 > half.lambda1,
        format!("octant {:.4} > hemisphere {:.4}", oct.lambda1, half.lambda1),
    );
    let rel = (oct.lambda1 / 12.0 - 1.0).abs();
    c.require(
        rel < C6_REL,
        format!(
            "octant lambda1 {:.4} vs 12 ({:.2}%)",
            oct.lambda1,
            100.0 * rel
        ),
    );
}

fn weight_equivalence(c: &mut Check) {
    let prism = Polyhedron::generate(Generator::LPrism {
        size: 1.0,
        height: 1.0,
    })
    .unwrap();
    for (name, p) in [("unit box", Polyhedron::unit_box()), ("L-prism", prism)] {
        let m = triangulate(&p, 0.25).unwrap();
        let eq = certify_equivalence(&p, &m, 10_000).unwrap();
        c.require(
            eq.c > 0.0 && C7_3D.0 <= eq.c && eq.c <= eq.big_c && eq.big_c <= C7_3D.1,
            format!(
                "{name}: (c, C) = ({:.4}, {:.4}) at {} samples",
                eq.c, eq.big_c, eq.samples
            ),
        );
    }
    for (name, p) in [
        ("unit square", Polyhedron::unit_square()),
        ("L-shape", Polyhedron::l_shape()),
    ] {
        let m = triangulate(&p, 0.25).unwrap();
        let eq = certify_equivalence(&p, &m, 10_000).unwrap();
        c.require(
            C7_2D.0 <= eq.c && eq.c <= eq.big_c && eq.big_c <= C7_2D.1,
            format!("{name}: (c, C) = ({:.4}, {:.4})", eq.c, eq.big_c),
        );
    }
}

fn weight_window(c: &mut Check) {
    let l = Polyhedron::l_shape();
    let m = refine(
        &triangulate(&l, 0.125).unwrap(),
        &GradingSpec::new(0.2, 3).unwrap(),
        &l,
    )
    .unwrap();
    let est = weight_window_probe(&l, &m, &[0.0, 0.3, 0.5, 0.6, 0.66, 0.7, 0.8]).unwrap();
    match est.onset {
        Some((lo, hi)) => c.require(
            (lo - 2.0 / 3.0).abs() <= C8_BRACKET && (hi - 2.0 / 3.0).abs() <= C8_BRACKET,
            format!(
                "L-shape onset bracket ({lo}, {hi}) within 0.1 of 2/3, kappa {:.4}",
                est.kappa
            ),
        ),
        None => c.require(false, "L-shape: no degradation on the grid"),
    }
    let sq = Polyhedron::unit_square();
    let m = triangulate(&sq, 0.125).unwrap();
    let est = weight_window_probe(&sq, &m, &[-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
    c.require(
        est.points.iter().all(|p| p.stable) && est.onset.is_none(),
        format!("square stable on |a| <= 1, radius {}", est.stable_radius),
    );
}

fn mapping_property(c: &mut Check) {
    let l = Polyhedron::l_shape();
    let m = triangulate(&l, 0.0625).unwrap();
    let m2 = refine(&m, &GradingSpec::uniform(1), &l).unwrap();
    let basis = bump_basis(&l, 10, 0.2);
    c.require(basis.len() == 10, format!("{} bumps", basis.len()));
    for a in [0.0, 0.5, 1.0] {
        let s1 = mapping_study(&l, &m, a, &basis).unwrap();
        let s2 = mapping_study(&l, &m2, a, &basis).unwrap();
        let change = (s2.constant / s1.constant - 1.0).abs();
        c.require(
            change < C9_CHANGE,
            format!(
                "a = {a}: {:.4} -> {:.4} ({:.1}%)",
                s1.constant,
                s2.constant,
                100.0 * change
            ),
        );
    }
    let sq = Polyhedron::unit_square();
    let m = triangulate(&sq, 0.125).unwrap();
    let est = conjugation_lipschitz(&m, &WeightField::eta(&sq), &[0.0, 0.25, 0.5]).unwrap();
    c.require(
        est.constant.is_finite() && (est.constant - C9_LIPSCHITZ).abs() < C9_LIPSCHITZ_TOL,
        format!("Lipschitz {:.10} vs frozen {C9_LIPSCHITZ}", est.constant),
    );
}

fn trace_theorem(c: &mut Check) {
    for (name, p, h) in [
        ("L-shape", Polyhedron::l_shape(), 0.125),
        ("unit box", Polyhedron::unit_box(), 0.25),
    ] {
        let m = triangulate(&p, h).unwrap();
        let w = WeightField::eta(&p);
        let mut worst = f64::NEG_INFINITY;
        for seed in 0..FIELDS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = FemField::new(
                &m,
                (0..m.num_nodes())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            )
            .unwrap();
            let norm = k_norm(&u, NormSpec::domain(1, 1.0), &w).unwrap().value;
            let t = trace_norm_surrogate(&trace(&u), &m, &w).unwrap().value;
            worst = worst.max(t - norm);
        }
        c.require(
            worst <= 0.0,
            format!("{name}: max(trace - norm) = {worst:.3e} over {FIELDS} fields"),
        );

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data: Vec<f64> = m
            .boundary_nodes()
            .iter()
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let g = BoundaryField::new(&m, data.clone()).unwrap();
        let ext = trace_norm_surrogate(&g, &m, &w).unwrap();
        let u = FemField::new(&m, ext.extension).unwrap();
        c.require(
            trace(&u).values() == data.as_slice() && ext.value.is_finite(),
            format!(
                "{name}: extension reproduces boundary data, norm {:.4}",
                ext.value
            ),
        );
    }
}

fn determinism(c: &mut Check) {
    let run = || {
        let l = Polyhedron::l_shape();
        let m = triangulate(&l, 0.125).unwrap();
        let cert = constructive_kappa(&l, &build_decomposition(&l).unwrap(), &m).unwrap();
        let solve =
            solve_dirichlet(&BvpProblem::new(&l, &m).boundary(Data::function(corner_solution)))
                .unwrap();
        let window = weight_window_probe(&l, &m, &[0.0, 0.5, 1.0]).unwrap();
        [
            poincare_report(&m, &cert, &"acceptance").unwrap().to_json(),
            solve_report(&m, &solve, &"acceptance").unwrap().to_json(),
            window_report(&m, &window, &"acceptance").unwrap().to_json(),
        ]
    };
    let (first, second) = (run(), run());
    for (kind, (x, y)) in ["poincare", "solve", "window"]
        .iter()
        .zip(first.iter().zip(&second))
    {
        c.require(x == y, format!("{kind}: {} bytes identical", x.len()));
    }
}

fn main() {
    let criteria: [(&str, fn(&mut Check)); 11] = [
        ("manufactured convergence", manufactured_convergence),
        ("corner regularity", corner_regularity),
        ("Hardy-Poincare inequality", hardy_poincare),
        (
            "constructive vs variational kappa",
            constructive_vs_variational,
        ),
        ("sector oracle", sector_oracle),
        ("spherical cap oracle", spherical_cap),
        ("weight equivalence", weight_equivalence),
        ("weight window", weight_window),
        ("mapping property", mapping_property),
        ("trace theorem", trace_theorem),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("{:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut check = Check::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&mut check)));
        let secs = start.elapsed().as_secs_f64();
        let passed = outcome.is_ok() && check.failures.is_empty();
        println!(
            "{} {label} ({secs:.1}s)",
            if passed { "PASS" } else { "FAIL" }
        );
        for n in &check.notes {
            let mark = if check.failures.contains(n) { "x" } else { "-" };
            println!("       {mark} {n}");
        }
        if outcome.is_err() {
            println!("       x panicked");
        }
        if !passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
