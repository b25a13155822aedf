//! Plain-text summaries printed to stdout.

use std::fmt::Write;

use klab_core::poincare::PoincareCertificate;
use klab_core::wellposed::{ConvergenceTable, WindowEstimate};

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}"))
        .unwrap_or_else(|| "-".into())
}

pub fn certificate(c: &PoincareCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Hardy-Poincare certificate");
    let _ = writeln!(s, "  cover: epsilon = {}, delta = {}", c.epsilon, c.delta);
    let _ = writeln!(
        s,
        "  {:<24} {:>12} {:>11} {:>10} {:>10} {:>12}",
        "region", "constant", "provenance", "pi/theta", "check", "effective"
    );
    for r in &c.regions {
        let _ = writeln!(
            s,
            "  {:<24} {:>12.6} {:>11} {:>10} {:>10} {:>12.6}",
            r.label,
            r.constant,
            r.provenance.as_str(),
            opt(r.stated_factor, 4),
            opt(r.cross_check, 6),
            r.effective
        );
    }
    let res = &c.residual;
    let _ = writeln!(
        s,
        "  residual set: eta_min = {:.6} (sampled {:.6}, offset {:.6}), C_P = {:.6}, C_P/eta_min^2 = {:.6}",
        res.eta_min, res.eta_min_sampled, res.eta_min_offset, res.poincare_constant, res.effective
    );
    for t in &c.terms {
        let _ = writeln!(
            s,
            "  term {:<20} {:>12.6}  (slack {:.2e})",
            t.name, t.value, t.slack
        );
    }
    let v = &c.variational_kappa;
    let _ = writeln!(s, "  assembled constant   {:.6}", c.assembled_constant);
    let _ = writeln!(s, "  constructive kappa   {:.6}", c.constructive_kappa);
    let _ = writeln!(
        s,
        "  variational kappa    {:.6}  (lambda_max {:.6}, {} iterations, {} interior nodes)",
        v.value, v.lambda_max, v.iterations, v.interior_nodes
    );
    let _ = writeln!(
        s,
        "  slack {:.3e}: {}",
        c.slack,
        if c.passed { "PASSED" } else { "FAILED" }
    );
    s
}

pub fn convergence(t: &ConvergenceTable) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>10} {:>8} {:>12} {:>12} {:>8} {:>8}",
        "h", "nodes", "L2 error", "H1 error", "L2 rate", "H1 rate"
    );
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{:>10.5} {:>8} {:>12.4e} {:>12.4e} {:>8} {:>8}",
            r.h,
            r.nodes,
            r.l2_error,
            r.h1_error,
            opt(r.l2_rate, 3),
            opt(r.h1_rate, 3)
        );
    }
    s
}

pub fn window(w: &WindowEstimate) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>8} {:>12} {:>12} {:>12} {:>7}",
        "a", "coercivity", "hardy", "response", "stable"
    );
    for p in &w.points {
        let _ = writeln!(
            s,
            "{:>8.3} {:>12.6} {:>12.6} {:>12} {:>7}",
            p.a,
            p.coercivity,
            p.coercivity_hardy,
            opt(p.response, 6),
            p.stable
        );
    }
    let _ = writeln!(s, "kappa {:.6}, stable radius {}", w.kappa, w.stable_radius);
    match w.onset {
        Some((lo, hi)) => {
            let _ = writeln!(s, "degradation onset in ({lo}, {hi})");
        }
        None => {
            let _ = writeln!(s, "no degradation on the grid");
        }
    }
    if let Some(p) = w.predicted {
        let _ = writeln!(s, "predicted window edge {p:.6}");
    }
    s
}
