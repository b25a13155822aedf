//! Weighted Sobolev norms `K^mu_a` of P1 fields on the domain and on its
//! boundary, discrete dual norms, and the trace map with a minimal-extension
//! norm.
//!
//! `||u||^2_{K^mu_a} = sum_{|alpha| <= mu} int w^{2(|alpha| - a)} |d^alpha u|^2`.

mod boundary;
mod recovery;

use serde::{Deserialize, Serialize};

use crate::config::{CG_MAXIT, CG_TOL, OVERFLOW_GUARD};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_weighted_mass, assemble_weighted_stiffness, cg_solve, element_geometry, ElementRules,
    FemField, QuadPolicy, SparseOperator,
};
use crate::mesh::SimplicialMesh;
use crate::numeric::{dot, par_map_range, CompensatedSum};
use crate::weights::WeightField;

pub use boundary::{
    integer_boundary_norm, trace, trace_norm_surrogate, BoundaryField, TraceExtension,
};
pub use recovery::{pair_multi_index, second_order_pairs, HessianRecovery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Domain,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub mu: i32,
    pub a: f64,
    pub side: Side,
}

impl NormSpec {
    pub fn domain(mu: i32, a: f64) -> Self {
        NormSpec {
            mu,
            a,
            side: Side::Domain,
        }
    }

    pub fn boundary(mu: i32, a: f64) -> Self {
        NormSpec {
            mu,
            a,
            side: Side::Boundary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::InvalidArgument("weight index must be finite".into()));
        }
        match self.side {
            Side::Domain if !(0..=2).contains(&self.mu) => Err(Error::InvalidArgument(format!(
                "order {} is not supported for domain norms (0, 1, 2; negative orders use the dual norm)",
                self.mu
            ))),
            Side::Boundary if !(0..=1).contains(&self.mu) => {
                Err(Error::InvalidArgument(format!("order {} is not supported for boundary norms (0, 1)", self.mu)))
            }
            _ => Ok(()),
        }
    }
}

/// One multi-index contribution `||w^{|alpha|-a} d^alpha u||`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTerm {
    pub alpha: Vec<u8>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureInfo {
    pub regular_degree: usize,
    pub singular_degree: usize,
    pub singular_elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub spec: NormSpec,
    pub weight: String,
    pub value: f64,
    pub terms: Vec<NormTerm>,
    pub quadrature: QuadratureInfo,
    pub notes: Vec<String>,
}

impl NormReport {
    fn from_terms(
        spec: NormSpec,
        weight: &WeightField,
        sq: Vec<(Vec<u8>, f64)>,
        quad: QuadratureInfo,
    ) -> Result<Self> {
        for (alpha, v) in &sq {
            if !(v.is_finite() && *v <= OVERFLOW_GUARD) {
                return Err(Error::InadmissibleIndex {
                    term: format!("alpha = {alpha:?}"),
                    value: *v,
                });
            }
        }
        let value = crate::numeric::sum(sq.iter().map(|t| t.1)).sqrt();
        let terms = sq
            .into_iter()
            .map(|(alpha, v)| NormTerm {
                alpha,
                value: v.sqrt(),
            })
            .collect();
        Ok(NormReport {
            spec,
            weight: weight.kind().to_string(),
            value,
            terms,
            quadrature: quad,
            notes: Vec::new(),
        })
    }
}

fn multi_index(dim: usize, k: Option<usize>) -> Vec<u8> {
    let mut a = vec![0u8; dim];
    if let Some(k) = k {
        a[k] = 1;
    }
    a
}

/// Integrals `int_e w^p` over each element.
pub fn element_weight_integrals(
    m: &SimplicialMesh,
    w: &WeightField,
    p: f64,
    policy: QuadPolicy,
) -> Result<Vec<f64>> {
    let rules = ElementRules::new(m.dim(), policy)?;
    let wp = w.power(p);
    let parts = par_map_range(m.num_elements(), |e| -> Result<f64> {
        let g = element_geometry(&m.element_points(e));
        let mut acc = 0.0;
        for (x, _, wq) in rules.points(m, e, &g) {
            let v = wp.eval(&x)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonpositiveWeight { value: v });
            }
            acc += v * wq;
        }
        Ok(acc)
    });
    parts.into_iter().collect()
}

fn quad_info(m: &SimplicialMesh, policy: QuadPolicy) -> QuadratureInfo {
    QuadratureInfo {
        regular_degree: policy.regular,
        singular_degree: policy.singular,
        singular_elements: (0..m.num_elements())
            .filter(|&e| m.touches_singular(e))
            .count(),
    }
}

/// `K^mu_a` norm of a P1 field with weight `w`, broken down by multi-index.
/// Boundary specs act on the trace of `u`.
pub fn k_norm(u: &FemField, spec: NormSpec, w: &WeightField) -> Result<NormReport> {
    k_norm_with(u, spec, w, None, QuadPolicy::default())
}

/// As [`k_norm`], reusing a precomputed recovery for second derivatives.
pub fn k_norm_with(
    u: &FemField,
    spec: NormSpec,
    w: &WeightField,
    recovery: Option<&HessianRecovery>,
    policy: QuadPolicy,
) -> Result<NormReport> {
    spec.validate()?;
    let m = u.mesh();
    if spec.side == Side::Boundary {
        return integer_boundary_norm(&trace(u), spec.mu, spec.a, w);
    }
    let d = m.dim();
    let vals = u.values();
    let mut sq: Vec<(Vec<u8>, f64)> = Vec::new();

    // order 0, quadrature of w^{-2a} u_h^2
    let rules = ElementRules::new(d, policy)?;
    let w0 = w.power(-2.0 * spec.a);
    let parts = par_map_range(m.num_elements(), |e| -> Result<f64> {
        let g = element_geometry(&m.element_points(e));
        let el = m.element(e);
        let mut acc = 0.0;
        for (x, lam, wq) in rules.points(m, e, &g) {
            let uh: f64 = el.iter().enumerate().map(|(a, &i)| vals[i] * lam[a]).sum();
            let wv = w0.eval(&x)?;
            if !(wv > 0.0 && wv.is_finite()) {
                return Err(Error::NonpositiveWeight { value: wv });
            }
            acc += wq * wv * uh * uh;
        }
        Ok(acc)
    });
    let mut acc = CompensatedSum::new();
    for p in parts {
        acc.add(p?);
    }
    sq.push((multi_index(d, None), acc.value()));

    if spec.mu >= 1 {
        let w1 = element_weight_integrals(m, w, 2.0 * (1.0 - spec.a), policy)?;
        let mut acc = vec![CompensatedSum::new(); d];
        for (e, we) in w1.iter().enumerate() {
            let g = u.element_gradient(e);
            for (k, a) in acc.iter_mut().enumerate() {
                a.add(we * g[k] * g[k]);
            }
        }
        for (k, a) in acc.iter().enumerate() {
            sq.push((multi_index(d, Some(k)), a.value()));
        }
    }
    if spec.mu >= 2 {
        let owned;
        let rec = match recovery {
            Some(r) => r,
            None => {
                owned = HessianRecovery::new(m);
                &owned
            }
        };
        let w2 = element_weight_integrals(m, w, 2.0 * (2.0 - spec.a), policy)?;
        for (pair, op) in rec.operators() {
            let h = op.matvec(vals);
            let mut acc = CompensatedSum::new();
            for (we, he) in w2.iter().zip(&h) {
                acc.add(we * he * he);
            }
            sq.push((pair_multi_index(d, *pair), acc.value()));
        }
    }
    let mut rep = NormReport::from_terms(spec, w, sq, quad_info(m, policy))?;
    if spec.mu >= 2 {
        rep.notes
            .push("second derivatives from patch-recovered gradients".into());
    }
    Ok(rep)
}

/// Gram operator of the `K^mu_a` inner product on all nodes, so that
/// `u^T G u = k_norm(u)^2` with the same quadrature.
pub fn gram_operator(
    m: &SimplicialMesh,
    mu: i32,
    a: f64,
    w: &WeightField,
    recovery: Option<&HessianRecovery>,
    policy: QuadPolicy,
) -> Result<SparseOperator> {
    NormSpec::domain(mu, a).validate()?;
    let w0 = w.power(-2.0 * a);
    let mut g = assemble_weighted_mass(m, &|x| w0.eval(x), policy)?;
    if mu >= 1 {
        let w1 = w.power(2.0 * (1.0 - a));
        let k = assemble_weighted_stiffness(m, &|x| w1.eval(x), policy)?;
        g = g.add(1.0, &k, 1.0);
    }
    if mu >= 2 {
        let owned;
        let rec = match recovery {
            Some(r) => r,
            None => {
                owned = HessianRecovery::new(m);
                &owned
            }
        };
        let w2 = element_weight_integrals(m, w, 2.0 * (2.0 - a), policy)?;
        for (_, op) in rec.operators() {
            g = g.add(1.0, &op.weighted_gram(&w2), 1.0);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualNorm {
    pub value: f64,
    pub iterations: usize,
}

/// Discrete `K^{-mu}_{-a}` norm of the functional with load vector `load`
/// (one entry per mesh node): `sup (F, v) / ||v||_{K^mu_a}` over zero-trace
/// P1 fields, i.e. `sqrt(F_I^T G_II^-1 F_I)`.
pub fn k_dual_norm(
    load: &[f64],
    mu: i32,
    a: f64,
    m: &SimplicialMesh,
    w: &WeightField,
) -> Result<DualNorm> {
    if !(1..=2).contains(&mu) {
        return Err(Error::InvalidArgument(format!(
            "dual norms are supported for orders 1 and 2, got {mu}"
        )));
    }
    if load.len() != m.num_nodes() {
        return Err(Error::InvalidArgument(
            "load vector length must equal the node count".into(),
        ));
    }
    let inner = m.interior_nodes();
    let g = gram_operator(m, mu, a, w, None, QuadPolicy::default())?.restrict(&inner);
    let f: Vec<f64> = inner.iter().map(|&i| load[i]).collect();
    let sol = cg_solve(&g, &f, CG_TOL, CG_MAXIT)?;
    Ok(DualNorm {
        value: dot(&f, &sol.x).max(0.0).sqrt(),
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests;
