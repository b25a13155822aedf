//! The conjugated Dirichlet form.
//!
//! Writing `u = w^a u~` and testing with `v = w^-a v~` turns `int grad u . grad v`
//! into
//!
//! `B_a(u~, v~) = int (grad u~ + a u~ b) . (grad v~ - a v~ b)`,  `b = grad w / w`,
//!
//! so on P1 hat functions `A(a) = K + a S - a^2 M_b` with the skew part
//! `S_ij = int phi_j (b . grad phi_i) - phi_i (b . grad phi_j)` and the
//! potential `M_b = int |b|^2 phi_i phi_j`.

use serde::Serialize;

use crate::config::{CG_MAXIT, CG_TOL, OVERFLOW_GUARD};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_advection, assemble_stiffness, cg_solve, element_geometry, ElementRules, QuadPolicy,
    SparseOperator,
};
use crate::geometry::Point;
use crate::mesh::SimplicialMesh;
use crate::numeric::{dot, norm2, par_map_range};
use crate::weights::WeightField;

/// Largest admissible `|a|` for conjugated solves.
pub const MAX_INDEX: f64 = 2.0;

pub(crate) fn check_index(a: f64) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "weight index must be finite, got {a}"
        )));
    }
    if a.abs() > MAX_INDEX {
        return Err(Error::InvalidArgument(format!(
            "|a| must not exceed {MAX_INDEX}, got {a}"
        )));
    }
    Ok(())
}

/// The a-independent pieces of `A(a)` on all mesh nodes.
#[derive(Debug, Clone)]
pub struct ConjugationFamily {
    pub stiffness: SparseOperator,
    pub skew: SparseOperator,
    pub potential: SparseOperator,
    /// Largest `|entry|` of the potential, for the overflow guard.
    pub potential_peak: f64,
}

impl ConjugationFamily {
    pub fn new(m: &SimplicialMesh, w: &WeightField) -> Result<Self> {
        let policy = QuadPolicy::default();
        let b = |x: &Point| w.log_grad(x);
        let adv = assemble_advection(m, &b, policy)?;
        let skew = adv.transpose().add(1.0, &adv, -1.0);
        let potential =
            crate::fem::assemble_weighted_mass(m, &|x| Ok(w.log_grad(x)?.norm_squared()), policy)?;
        let mut peak: f64 = 0.0;
        for i in 0..potential.n() {
            for v in potential.row(i).1 {
                peak = if v.is_finite() {
                    peak.max(v.abs())
                } else {
                    f64::INFINITY
                };
            }
        }
        Ok(ConjugationFamily {
            stiffness: assemble_stiffness(m),
            skew,
            potential,
            potential_peak: peak,
        })
    }

    /// `K + a S - a^2 M_b`.
    pub fn member(&self, a: f64) -> Result<SparseOperator> {
        check_index(a)?;
        let scaled = a * a * self.potential_peak;
        if !(scaled.is_finite() && scaled <= OVERFLOW_GUARD) {
            return Err(Error::InadmissibleIndex {
                term: format!("conjugation potential at a = {a}"),
                value: scaled,
            });
        }
        Ok(self
            .stiffness
            .add(1.0, &self.skew, a)
            .add(1.0, &self.potential, -a * a))
    }
}

/// One member of the conjugated family; `a = 0` reproduces the stiffness
/// matrix bit for bit.
pub fn conjugate_operator(a: f64, m: &SimplicialMesh, w: &WeightField) -> Result<SparseOperator> {
    check_index(a)?;
    ConjugationFamily::new(m, w)?.member(a)
}

/// Operator taking the lift `u_g` to its contribution against conjugated
/// test functions: `T_ij = int w^-a (grad phi_j . grad phi_i - a phi_i b . grad phi_j)`.
pub(crate) fn lift_coupling(m: &SimplicialMesh, w: &WeightField, a: f64) -> Result<SparseOperator> {
    if a == 0.0 {
        return Ok(assemble_stiffness(m));
    }
    let rules = ElementRules::new(m.dim(), QuadPolicy::default())?;
    let wp = w.power(-a);
    let k = m.dim() + 1;
    let locals = par_map_range(m.num_elements(), |e| -> Result<Vec<(usize, usize, f64)>> {
        let g = element_geometry(&m.element_points(e));
        let mut v = vec![0.0; k * k];
        for (x, lam, wq) in rules.points(m, e, &g) {
            let s = wp.eval(&x)?;
            let b = w.log_grad(&x)?;
            for i in 0..k {
                for j in 0..k {
                    v[i * k + j] +=
                        wq * s * (g.grads[j].dot(&g.grads[i]) - a * lam[i] * b.dot(&g.grads[j]));
                }
            }
        }
        let el = m.element(e);
        Ok((0..k * k)
            .map(|ij| (el[ij / k], el[ij % k], v[ij]))
            .collect())
    });
    let mut t = Vec::new();
    for l in locals {
        t.extend(l?);
    }
    Ok(SparseOperator::from_triplets(m.num_nodes(), &t, false))
}

/// `sup_x ||E x||_{K^-1} / ||x||_K` by power iteration on `K^-1 E^T K^-1 E`.
pub fn relative_operator_norm(
    e: &SparseOperator,
    k: &SparseOperator,
    iterations: usize,
) -> Result<f64> {
    let et = e.transpose();
    let n = e.n();
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + crate::numeric::halton(i as u64 + 1, 3))
        .collect();
    let mut sigma2 = 0.0;
    for _ in 0..iterations {
        let kx = k.matvec(&x);
        let xkx = dot(&x, &kx);
        if xkx <= 0.0 {
            return Ok(0.0);
        }
        let ex = e.matvec(&x);
        if norm2(&ex) == 0.0 {
            return Ok(0.0);
        }
        let y = cg_solve(k, &ex, CG_TOL, CG_MAXIT)?.x;
        let next = dot(&ex, &y) / xkx;
        let z = cg_solve(k, &et.matvec(&y), CG_TOL, CG_MAXIT)?.x;
        let zn = norm2(&z);
        x = z.iter().map(|v| v / zn).collect();
        let done = (next - sigma2).abs() <= 1e-10 * next;
        sigma2 = next;
        if done {
            break;
        }
    }
    Ok(sigma2.max(0.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzEstimate {
    pub grid: Vec<f64>,
    /// `||A(a_{k+1}) - A(a_k)|| / |a_{k+1} - a_k|` on interior nodes, relative to `K`.
    pub quotients: Vec<f64>,
    pub constant: f64,
}

/// Lipschitz constant of `a -> A(a)` measured on consecutive grid points.
pub fn conjugation_lipschitz(
    m: &SimplicialMesh,
    w: &WeightField,
    grid: &[f64],
) -> Result<LipschitzEstimate> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two grid points".into(),
        ));
    }
    for &a in grid {
        check_index(a)?;
    }
    let fam = ConjugationFamily::new(m, w)?;
    let inner = m.interior_nodes();
    let k = fam.stiffness.restrict(&inner);
    let pairs: Vec<(f64, f64)> = grid.windows(2).map(|p| (p[0], p[1])).collect();
    let quotients = crate::numeric::par_map(&pairs, |&(a0, a1)| -> Result<f64> {
        if a0 == a1 {
            return Err(Error::InvalidArgument(format!("repeated grid point {a0}")));
        }
        let d = fam
            .member(a1)?
            .add(1.0, &fam.member(a0)?, -1.0)
            .restrict(&inner);
        Ok(relative_operator_norm(&d, &k, 200)? / (a1 - a0).abs())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let constant = quotients.iter().cloned().fold(0.0, f64::max);
    Ok(LipschitzEstimate {
        grid: grid.to_vec(),
        quotients,
        constant,
    })
}
