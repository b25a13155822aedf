//! Refinement studies built on [`solve_dirichlet`]: convergence tables,
//! regularity ratios, the weight-window probe and the mapping constants.

use std::f64::consts::PI;

use serde::Serialize;

use super::{reduce, solve_dirichlet, BvpProblem, ConjugationFamily, Data, NormTable, Sign};
use crate::config::{CG_MAXIT, CG_TOL, EIG_TOL, GMRES_MAXIT, GMRES_RESTART};
use crate::error::{Error, Result};
use crate::fem::{
    cg_solve, generalized_eig_extreme, gmres, FemField, QuadPolicy, ScalarFn, VectorFn, Which,
};
use crate::geometry::{Point, Polyhedron};
use crate::mesh::SimplicialMesh;
use crate::numeric::{pair_rate, par_map, par_map_range};
use crate::poincare::variational_kappa;
use crate::sobolev::{element_weight_integrals, k_norm_with, HessianRecovery, NormSpec};
use crate::weights::{interior_samples, WeightField};

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    /// Largest element diameter.
    pub h: f64,
    pub nodes: usize,
    pub l2_error: f64,
    pub h1_error: f64,
    /// Rates against the previous row in `h`; `None` on the first row.
    pub l2_rate: Option<f64>,
    pub h1_rate: Option<f64>,
    /// Rate of the H1 error against `nodes^(-1/d)`, for graded meshes.
    pub h1_rate_nodes: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn last_l2_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.l2_rate)
    }

    pub fn last_h1_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.h1_rate)
    }

    /// Least-squares rates `(l2, h1, h1 against nodes)` over all rows.
    pub fn fitted_rates(&self) -> (f64, f64, f64) {
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let d = self.rows.first().map(|r| r.nodes as f64).unwrap_or(1.0);
        let hn: Vec<f64> = self
            .rows
            .iter()
            .map(|r| (r.nodes as f64 / d).powf(-0.5))
            .collect();
        let l2: Vec<f64> = self.rows.iter().map(|r| r.l2_error).collect();
        let h1: Vec<f64> = self.rows.iter().map(|r| r.h1_error).collect();
        (
            crate::numeric::fitted_rate(&h, &l2),
            crate::numeric::fitted_rate(&h, &h1),
            crate::numeric::fitted_rate(&hn, &h1),
        )
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut s = String::from(
            "h,nodes,l2_error,h1_error,l2_rate,h1_rate,h1_rate_nodes,iterations,residual\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:.9e},{},{:.9e},{:.9e},{},{},{},{},{:.3e}\n",
                r.h,
                r.nodes,
                r.l2_error,
                r.h1_error,
                opt(r.l2_rate),
                opt(r.h1_rate),
                opt(r.h1_rate_nodes),
                r.iterations,
                r.residual
            ));
        }
        s
    }
}

/// Solves on every mesh and tabulates errors against the exact solution.
pub fn convergence_study<'m, F>(
    meshes: &'m [SimplicialMesh],
    make: F,
    exact: &ScalarFn,
    exact_grad: &VectorFn,
) -> Result<ConvergenceTable>
where
    F: Fn(&'m SimplicialMesh) -> BvpProblem<'m> + Sync,
{
    let solved = par_map_range(
        meshes.len(),
        |i| -> Result<(f64, usize, f64, f64, usize, f64)> {
            let m: &'m SimplicialMesh = &meshes[i];
            let rep = solve_dirichlet(&make(m))?;
            let u = FemField::new(m, rep.solution)?;
            let policy = QuadPolicy::default();
            Ok((
                m.max_diameter(),
                m.num_nodes(),
                u.l2_error(exact, policy)?,
                u.h1_seminorm_error(exact_grad, policy)?,
                rep.iterations,
                rep.residual,
            ))
        },
    );
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let dim = meshes.first().map(|m| m.dim()).unwrap_or(2) as f64;
    for s in solved {
        let (h, nodes, l2, h1, iterations, residual) = s?;
        let prev = rows.last();
        rows.push(ConvergenceRow {
            h,
            nodes,
            l2_error: l2,
            h1_error: h1,
            l2_rate: prev.map(|p| pair_rate(p.h, p.l2_error, h, l2)),
            h1_rate: prev.map(|p| pair_rate(p.h, p.h1_error, h, h1)),
            h1_rate_nodes: prev.map(|p| {
                pair_rate(
                    (p.nodes as f64).powf(-1.0 / dim),
                    p.h1_error,
                    (nodes as f64).powf(-1.0 / dim),
                    h1,
                )
            }),
            iterations,
            residual,
        });
    }
    Ok(ConvergenceTable { rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityRatio {
    /// `||u||_{K^2_{a+1}} / (||f||_{K^0_{a-1}} + ||u||_{K^0_1} + ||g||)`;
    /// `None` when everything vanishes.
    pub value: Option<f64>,
    pub norms: NormTable,
    pub note: Option<String>,
}

/// Solves and evaluates the second-order stability ratio.
pub fn regularity_ratio(problem: &BvpProblem) -> Result<RegularityRatio> {
    let p = problem.clone().order(1);
    let rep = solve_dirichlet(&p)?;
    let value = rep.norms.stability_ratio();
    let note = value
        .is_none()
        .then(|| "undefined (zero solution)".to_string());
    Ok(RegularityRatio {
        value,
        norms: rep.norms,
        note,
    })
}

/// Fraction of the unconjugated coercivity constant below which an index
/// counts as degraded.
pub const WINDOW_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct WindowPoint {
    pub a: f64,
    /// `1 - lambda_max(K - sym A(a), K)` from the assembled conjugated operator.
    pub coercivity: f64,
    /// `1 - a^2 (kappa - 1)` from the variational Hardy constant.
    pub coercivity_hardy: f64,
    pub eigen_iterations: usize,
    /// `||u~||_K` for the fixed source `f = 1`, if the solve succeeded.
    pub response: Option<f64>,
    pub solve_iterations: Option<usize>,
    pub solve_error: Option<String>,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowEstimate {
    pub points: Vec<WindowPoint>,
    pub threshold: f64,
    pub kappa: f64,
    /// Largest grid `|a|` such that every grid point with `|a'| <= |a|` is stable.
    pub stable_radius: f64,
    /// `(last stable |a|, first degraded |a|)`, if degradation was seen.
    pub onset: Option<(f64, f64)>,
    /// `min_v pi / theta_v` for polygons.
    pub predicted: Option<f64>,
    /// Largest disagreement between the two coercivity routes.
    pub route_gap: f64,
}

/// Sweeps the weight index, recording the coercivity of the conjugated form
/// (two routes) and the response of a fixed solve at each grid point.
pub fn weight_window_probe(
    domain: &Polyhedron,
    mesh: &SimplicialMesh,
    a_grid: &[f64],
) -> Result<WindowEstimate> {
    if a_grid.is_empty() {
        return Err(Error::InvalidArgument("empty index grid".into()));
    }
    for &a in a_grid {
        super::conjugate::check_index(a)?;
    }
    let w = WeightField::eta(domain);
    let fam = ConjugationFamily::new(mesh, &w)?;
    let kappa = variational_kappa(mesh, &w)?.value;
    let inner = mesh.interior_nodes();
    let k = fam.stiffness.restrict(&inner);
    let points = par_map(a_grid, |&a| -> Result<WindowPoint> {
        let op = fam.member(a)?.restrict(&inner);
        let sym = op.add(0.5, &op.transpose(), 0.5);
        let defect = k.add(1.0, &sym, -1.0);
        let zero = (0..defect.n()).all(|i| defect.row(i).1.iter().all(|v| *v == 0.0));
        let (lambda, eigen_iterations) = if zero {
            (0.0, 0)
        } else {
            let pair = generalized_eig_extreme(&defect, &k, Which::Largest, EIG_TOL)?;
            (pair.value, pair.iterations)
        };
        let probe = BvpProblem::new(domain, mesh)
            .source(Data::function(|_| 1.0))
            .index(a)
            .sign(Sign::NegativeLaplacian);
        let (response, solve_iterations, solve_error) = match response(&probe, &fam) {
            Ok((r, it)) => (Some(r), Some(it), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        Ok(WindowPoint {
            a,
            coercivity: 1.0 - lambda,
            coercivity_hardy: 1.0 - a * a * (kappa - 1.0),
            eigen_iterations,
            response,
            solve_iterations,
            solve_error,
            stable: false,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    // The a = 0 member is K itself, so its coercivity constant is exactly 1.
    let threshold = WINDOW_THRESHOLD;
    let mut points = points;
    for p in &mut points {
        p.stable = p.coercivity >= threshold;
    }
    let mut by_abs: Vec<(f64, bool)> = points.iter().map(|p| (p.a.abs(), p.stable)).collect();
    by_abs.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut stable_radius = 0.0;
    let mut onset = None;
    for &(r, ok) in &by_abs {
        if ok {
            stable_radius = r;
        } else {
            onset = Some((stable_radius, r));
            break;
        }
    }
    let predicted = if domain.dim() == 2 {
        let mut best = f64::INFINITY;
        for v in 0..domain.num_vertices() {
            best = best.min(PI / domain.interior_angle(v)?);
        }
        Some(best)
    } else {
        None
    };
    let route_gap = points
        .iter()
        .map(|p| (p.coercivity - p.coercivity_hardy).abs())
        .fold(0.0, f64::max);
    Ok(WindowEstimate {
        points,
        threshold,
        kappa,
        stable_radius,
        onset,
        predicted,
        route_gap,
    })
}

fn response(problem: &BvpProblem, fam: &ConjugationFamily) -> Result<(f64, usize)> {
    let red = reduce(problem, Some(fam))?;
    let (x, it) = if problem.a == 0.0 {
        let s = cg_solve(&red.matrix, &red.rhs, CG_TOL, CG_MAXIT)?;
        (s.x, s.iterations)
    } else {
        let s = gmres(
            &red.matrix,
            &red.matrix.diagonal(),
            &red.rhs,
            1e-10,
            GMRES_RESTART,
            GMRES_MAXIT,
        )?;
        (s.x, s.iterations)
    };
    let k = fam.stiffness.restrict(&red.interior);
    Ok((k.form(&x, &x).max(0.0).sqrt(), it))
}

/// A smooth bump `exp(1 - 1/(1 - s^2))`, `s = |x - center| / radius`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bump {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Bump {
    pub fn eval(&self, x: &Point) -> f64 {
        let c = Point::new(self.center[0], self.center[1], self.center[2]);
        let s2 = (x - c).norm_squared() / (self.radius * self.radius);
        if s2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s2)).exp()
        }
    }
}

/// `count` bumps with quasi-random centres, each supported well inside the
/// domain (radius `0.8 x` boundary distance, at least `min_radius`).
pub fn bump_basis(domain: &Polyhedron, count: usize, min_radius: f64) -> Vec<Bump> {
    let mut out = Vec::with_capacity(count);
    let mut n = count;
    while out.len() < count {
        n *= 2;
        out.clear();
        for x in interior_samples(domain, n) {
            let r = 0.8 * domain.boundary_distance(&x);
            if r >= min_radius {
                out.push(Bump {
                    center: [x.x, x.y, x.z],
                    radius: r,
                });
                if out.len() == count {
                    break;
                }
            }
        }
        if n > 1 << 20 {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MappingStudy {
    pub a: f64,
    pub nodes: usize,
    /// `||Lap_h u||_{K^0_{a-2}} / ||u||_{K^2_a}` per basis field.
    pub ratios: Vec<f64>,
    pub constant: f64,
}

/// Laplacian-proxy mapping constants over a bump basis.
pub fn mapping_study(
    domain: &Polyhedron,
    mesh: &SimplicialMesh,
    a: f64,
    basis: &[Bump],
) -> Result<MappingStudy> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty bump basis".into()));
    }
    let w = WeightField::eta(domain);
    let rec = HessianRecovery::new(mesh);
    let policy = QuadPolicy::default();
    let w2 = element_weight_integrals(mesh, &w, 2.0 * (2.0 - a), policy)?;
    let ratios = par_map(basis, |b| -> Result<f64> {
        let u = FemField::interpolate(mesh, |x| b.eval(x));
        let lap = rec.laplacian(u.values());
        let num: f64 = lap
            .iter()
            .zip(&w2)
            .map(|(l, we)| we * l * l)
            .sum::<f64>()
            .sqrt();
        let den = k_norm_with(&u, NormSpec::domain(2, a), &w, Some(&rec), policy)?.value;
        if den == 0.0 {
            return Err(Error::MeshTooCoarse(
                "bump is not resolved by the mesh".into(),
            ));
        }
        Ok(num / den)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let constant = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(MappingStudy {
        a,
        nodes: mesh.num_nodes(),
        ratios,
        constant,
    })
}
