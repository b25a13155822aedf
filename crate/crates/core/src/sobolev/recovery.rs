//! Patch-recovered gradients and elementwise second derivatives of P1 fields,
//! assembled as explicit sparse operators so that quadratic forms built from
//! them (Gram matrices of second-order norms) are available.

use nalgebra::{DMatrix, DVector};

use crate::fem::{element_geometry, SparseOperator};
use crate::mesh::SimplicialMesh;

/// Second-order multi-indices in dimension `dim`, as `(k, l)` with `k <= l`.
pub fn second_order_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..dim {
        for l in k..dim {
            out.push((k, l));
        }
    }
    out
}

/// Multi-index exponents of a pair `(k, l)`.
pub fn pair_multi_index(dim: usize, (k, l): (usize, usize)) -> Vec<u8> {
    let mut a = vec![0u8; dim];
    a[k] += 1;
    a[l] += 1;
    a
}

#[derive(Debug, Clone)]
pub struct HessianRecovery {
    dim: usize,
    /// Recovered gradient component `k` at the nodes: `grad[k] u`.
    grad: Vec<SparseOperator>,
    /// Symmetrized elementwise second derivative for each pair, elements x nodes.
    hess: Vec<((usize, usize), SparseOperator)>,
}

impl HessianRecovery {
    /// Least-squares linear fit of element gradients (sampled at centroids)
    /// over the node patch, evaluated at the node. Boundary nodes and small
    /// patches use the two-ring patch.
    pub fn new(m: &SimplicialMesh) -> Self {
        let d = m.dim();
        let nn = m.num_nodes();
        let ne = m.num_elements();
        let node_el = m.node_elements();
        let geos: Vec<_> = (0..ne)
            .map(|e| element_geometry(&m.element_points(e)))
            .collect();
        let centroids: Vec<_> = (0..ne)
            .map(|e| geos[e].points.iter().sum::<crate::geometry::Point>() / (d + 1) as f64)
            .collect();
        let mut trip: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); d];
        for i in 0..nn {
            let mut patch = node_el[i].clone();
            if m.is_boundary_node(i) || patch.len() < 2 * (d + 1) {
                for &e in &node_el[i] {
                    for &j in m.element(e) {
                        patch.extend(node_el[j].iter().copied());
                    }
                }
                patch.sort_unstable();
                patch.dedup();
            }
            let coef = fit_weights(&patch, &centroids, &m.node(i), d);
            for (&e, &c) in patch.iter().zip(&coef) {
                for (a, &j) in m.element(e).iter().enumerate() {
                    for (k, t) in trip.iter_mut().enumerate() {
                        t.push((i, j, c * geos[e].grads[a][k]));
                    }
                }
            }
        }
        let grad: Vec<SparseOperator> = trip
            .iter()
            .map(|t| SparseOperator::from_triplets(nn, t, false))
            .collect();
        let mut hess = Vec::new();
        for (k, l) in second_order_pairs(d) {
            let mut t = Vec::new();
            for e in 0..ne {
                for (a, &j) in m.element(e).iter().enumerate() {
                    let gl = geos[e].grads[a][l];
                    let gk = geos[e].grads[a][k];
                    let (ck, vk) = grad[k].row(j);
                    for (&c, &v) in ck.iter().zip(vk) {
                        t.push((e, c, 0.5 * gl * v));
                    }
                    let (cl, vl) = grad[l].row(j);
                    for (&c, &v) in cl.iter().zip(vl) {
                        t.push((e, c, 0.5 * gk * v));
                    }
                }
            }
            hess.push((
                (k, l),
                SparseOperator::from_triplets_rect(ne, nn, &t, false),
            ));
        }
        HessianRecovery { dim: d, grad, hess }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Recovered nodal gradient, one vector per component.
    pub fn recovered_gradient(&self, u: &[f64]) -> Vec<Vec<f64>> {
        self.grad.iter().map(|g| g.matvec(u)).collect()
    }

    /// Elementwise second-derivative operators, one per pair `(k, l)`.
    pub fn operators(&self) -> &[((usize, usize), SparseOperator)] {
        &self.hess
    }

    /// Elementwise Laplacian proxy: trace of the recovered Hessian.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for ((k, l), op) in &self.hess {
            if k == l {
                let v = op.matvec(u);
                if out.is_empty() {
                    out = v;
                } else {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += x;
                    }
                }
            }
        }
        out
    }
}

/// Coefficients `c_e` with `sum_e c_e g_e` = value at `x` of the
/// least-squares linear fit through the centroid samples `g_e`.
fn fit_weights(
    patch: &[usize],
    centroids: &[crate::geometry::Point],
    x: &crate::geometry::Point,
    d: usize,
) -> Vec<f64> {
    let n = patch.len();
    let p = DMatrix::from_fn(n, d + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            centroids[patch[r]][c - 1] - x[c - 1]
        }
    });
    let scale = patch
        .iter()
        .map(|&e| (centroids[e] - x).norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let ps = DMatrix::from_fn(
        n,
        d + 1,
        |r, c| if c == 0 { 1.0 } else { p[(r, c)] / scale },
    );
    let ptp = ps.transpose() * &ps;
    match ptp.clone().try_inverse() {
        Some(inv) if n > d && ptp.determinant().abs() > 1e-12 => {
            let mut e0 = DVector::zeros(d + 1);
            e0[0] = 1.0;
            let row = inv * e0;
            (0..n)
                .map(|r| (0..=d).map(|c| ps[(r, c)] * row[c]).sum())
                .collect()
        }
        _ => vec![1.0 / n as f64; n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polyhedron;
    use crate::mesh::triangulate;

    #[test]
    fn quadratics_are_recovered_on_interior_elements() {
        let sq = Polyhedron::unit_square();
        let m = triangulate(&sq, 1.0 / 16.0).unwrap();
        let u: Vec<f64> = m
            .nodes()
            .iter()
            .map(|p| p.x * p.x + 3.0 * p.x * p.y - p.y * p.y)
            .collect();
        let rec = HessianRecovery::new(&m);
        let exact = [((0, 0), 2.0), ((0, 1), 3.0), ((1, 1), -2.0)];
        for ((pair, op), (pe, ve)) in rec.operators().iter().zip(exact) {
            assert_eq!(*pair, pe);
            let h = op.matvec(&u);
            for e in 0..m.num_elements() {
                // elements whose nodes are at least two layers from the boundary
                let deep = m.element(e).iter().all(|&i| {
                    let p = m.node(i);
                    p.x > 0.1 && p.x < 0.9 && p.y > 0.1 && p.y < 0.9
                });
                if deep {
                    assert!((h[e] - ve).abs() < 1e-9, "{pair:?} {}", h[e]);
                }
            }
        }
    }

    #[test]
    fn affine_fields_have_zero_hessian() {
        let b = Polyhedron::unit_box();
        let m = triangulate(&b, 0.25).unwrap();
        let u: Vec<f64> = m
            .nodes()
            .iter()
            .map(|p| 1.0 + p.x - 2.0 * p.y + 0.5 * p.z)
            .collect();
        let rec = HessianRecovery::new(&m);
        assert_eq!(rec.operators().len(), 6);
        for (_, op) in rec.operators() {
            assert!(op.matvec(&u).iter().all(|v| v.abs() < 1e-10));
        }
    }
}
