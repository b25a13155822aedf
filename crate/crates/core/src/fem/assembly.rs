//! P1 element integrals and global assembly.

use nalgebra::{Matrix2, Matrix3};

use super::quadrature::{quadrature, QuadratureRule};
use super::sparse::SparseOperator;
use crate::config::{DEFAULT_QUAD_DEGREE, SINGULAR_QUAD_DEGREE};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::SimplicialMesh;
use crate::numeric::par_map_range;

/// A scalar coefficient evaluated at quadrature points.
pub type ScalarFn<'a> = dyn Fn(&Point) -> Result<f64> + Sync + 'a;
/// A vector coefficient evaluated at quadrature points.
pub type VectorFn<'a> = dyn Fn(&Point) -> Result<Point> + Sync + 'a;

/// Measure and constant barycentric gradients of a simplex. Works for
/// simplices embedded in a higher-dimensional space (surface triangles):
/// the gradients are tangential, `J (J^T J)^-1` applied to the reference ones.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub points: Vec<Point>,
    pub measure: f64,
    pub grads: Vec<Point>,
}

pub fn element_geometry(pts: &[Point]) -> ElementGeometry {
    let d = pts.len() - 1;
    let cols: Vec<Point> = (1..=d).map(|k| pts[k] - pts[0]).collect();
    let mut grads = vec![Point::zeros(); d + 1];
    let measure;
    match d {
        1 => {
            let l2 = cols[0].norm_squared();
            measure = l2.sqrt();
            grads[1] = cols[0] / l2;
        }
        2 => {
            let g = Matrix2::new(
                cols[0].dot(&cols[0]),
                cols[0].dot(&cols[1]),
                cols[1].dot(&cols[0]),
                cols[1].dot(&cols[1]),
            );
            measure = g.determinant().max(0.0).sqrt() / 2.0;
            let gi = g.try_inverse().unwrap_or_else(Matrix2::zeros);
            for k in 0..2 {
                grads[k + 1] = cols[0] * gi[(k, 0)] + cols[1] * gi[(k, 1)];
            }
        }
        _ => {
            let j = Matrix3::from_columns(&[cols[0], cols[1], cols[2]]);
            measure = j.determinant().abs() / 6.0;
            // Rows of J^-1 are the gradients of the reference coordinates.
            let ji = j.try_inverse().unwrap_or_else(Matrix3::zeros);
            for k in 0..3 {
                grads[k + 1] = Point::new(ji[(k, 0)], ji[(k, 1)], ji[(k, 2)]);
            }
        }
    }
    grads[0] = -grads[1..].iter().sum::<Point>();
    ElementGeometry {
        points: pts.to_vec(),
        measure,
        grads,
    }
}

/// Quadrature degrees: `singular` on elements touching the singular set.
#[derive(Debug, Clone, Copy)]
pub struct QuadPolicy {
    pub regular: usize,
    pub singular: usize,
}

impl Default for QuadPolicy {
    fn default() -> Self {
        QuadPolicy {
            regular: DEFAULT_QUAD_DEGREE,
            singular: SINGULAR_QUAD_DEGREE,
        }
    }
}

/// Quadrature rules for one mesh, chosen per element.
pub struct ElementRules {
    regular: QuadratureRule,
    singular: QuadratureRule,
    dim: usize,
}

impl ElementRules {
    pub fn new(dim: usize, policy: QuadPolicy) -> Result<Self> {
        Ok(ElementRules {
            regular: quadrature(dim, policy.regular)?,
            singular: quadrature(dim, policy.singular)?,
            dim,
        })
    }

    /// Physical quadrature points, barycentric coordinates and weights on element `e`.
    pub fn points(
        &self,
        m: &SimplicialMesh,
        e: usize,
        geo: &ElementGeometry,
    ) -> Vec<(Point, [f64; 4], f64)> {
        let rule = if m.touches_singular(e) {
            &self.singular
        } else {
            &self.regular
        };
        let scale = geo.measure * if self.dim == 2 { 2.0 } else { 6.0 };
        (0..rule.len())
            .map(|q| {
                let lam = rule.barycentric(q, self.dim);
                let x: Point = (0..=self.dim).map(|i| geo.points[i] * lam[i]).sum();
                (x, lam, rule.weights[q] * scale)
            })
            .collect()
    }
}

fn positive(w: f64, _x: &Point) -> Result<f64> {
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(Error::NonpositiveWeight { value: w })
    }
}

fn merge(
    n: usize,
    locals: Vec<Result<(Vec<usize>, Vec<f64>)>>,
    symmetric: bool,
) -> Result<SparseOperator> {
    let mut t = Vec::new();
    for l in locals {
        let (idx, vals) = l?;
        let k = idx.len();
        for a in 0..k {
            for b in 0..k {
                t.push((idx[a], idx[b], vals[a * k + b]));
            }
        }
    }
    Ok(SparseOperator::from_triplets(n, &t, symmetric))
}

/// `K_ij = int grad phi_i . grad phi_j` (exact, constant gradients).
pub fn assemble_stiffness(m: &SimplicialMesh) -> SparseOperator {
    let locals = par_map_range(m.num_elements(), |e| {
        let g = element_geometry(&m.element_points(e));
        let k = g.grads.len();
        let mut v = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                v[a * k + b] = g.measure * g.grads[a].dot(&g.grads[b]);
            }
        }
        Ok((m.element(e).to_vec(), v))
    });
    merge(m.num_nodes(), locals, true).expect("stiffness assembly is infallible")
}

/// `M_ij = int w phi_i phi_j` with `w` evaluated at quadrature points only.
pub fn assemble_weighted_mass(
    m: &SimplicialMesh,
    w: &ScalarFn,
    policy: QuadPolicy,
) -> Result<SparseOperator> {
    let rules = ElementRules::new(m.dim(), policy)?;
    let locals = par_map_range(m.num_elements(), |e| {
        let g = element_geometry(&m.element_points(e));
        let k = m.dim() + 1;
        let mut v = vec![0.0; k * k];
        for (x, lam, wq) in rules.points(m, e, &g) {
            let c = positive(w(&x)?, &x)? * wq;
            for a in 0..k {
                for b in 0..k {
                    v[a * k + b] += c * lam[a] * lam[b];
                }
            }
        }
        Ok((m.element(e).to_vec(), v))
    });
    merge(m.num_nodes(), locals, true)
}

/// `M_ij = int phi_i phi_j`.
pub fn assemble_mass(m: &SimplicialMesh) -> SparseOperator {
    assemble_weighted_mass(
        m,
        &|_| Ok(1.0),
        QuadPolicy {
            regular: 2,
            singular: 2,
        },
    )
    .expect("unit weight is positive")
}

/// `A_ij = int w grad phi_i . grad phi_j`.
pub fn assemble_weighted_stiffness(
    m: &SimplicialMesh,
    w: &ScalarFn,
    policy: QuadPolicy,
) -> Result<SparseOperator> {
    let rules = ElementRules::new(m.dim(), policy)?;
    let locals = par_map_range(m.num_elements(), |e| {
        let g = element_geometry(&m.element_points(e));
        let k = m.dim() + 1;
        let mut wint = 0.0;
        for (x, _, wq) in rules.points(m, e, &g) {
            wint += positive(w(&x)?, &x)? * wq;
        }
        let mut v = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                v[a * k + b] = wint * g.grads[a].dot(&g.grads[b]);
            }
        }
        Ok((m.element(e).to_vec(), v))
    });
    merge(m.num_nodes(), locals, true)
}

/// `A_ij = int (b . grad phi_j) phi_i` (not symmetric).
pub fn assemble_advection(
    m: &SimplicialMesh,
    b: &VectorFn,
    policy: QuadPolicy,
) -> Result<SparseOperator> {
    let rules = ElementRules::new(m.dim(), policy)?;
    let locals = par_map_range(m.num_elements(), |e| {
        let g = element_geometry(&m.element_points(e));
        let k = m.dim() + 1;
        let mut v = vec![0.0; k * k];
        for (x, lam, wq) in rules.points(m, e, &g) {
            let bx = b(&x)?;
            for a in 0..k {
                for c in 0..k {
                    v[a * k + c] += wq * lam[a] * bx.dot(&g.grads[c]);
                }
            }
        }
        Ok((m.element(e).to_vec(), v))
    });
    merge(m.num_nodes(), locals, false)
}

/// `F_i = int f phi_i`.
pub fn load_vector(m: &SimplicialMesh, f: &ScalarFn, policy: QuadPolicy) -> Result<Vec<f64>> {
    let rules = ElementRules::new(m.dim(), policy)?;
    let locals = par_map_range(m.num_elements(), |e| -> Result<Vec<f64>> {
        let g = element_geometry(&m.element_points(e));
        let k = m.dim() + 1;
        let mut v = vec![0.0; k];
        for (x, lam, wq) in rules.points(m, e, &g) {
            let fx = f(&x)?;
            for a in 0..k {
                v[a] += wq * fx * lam[a];
            }
        }
        Ok(v)
    });
    let mut acc = vec![crate::numeric::CompensatedSum::new(); m.num_nodes()];
    for (e, l) in locals.into_iter().enumerate() {
        for (a, val) in l?.into_iter().enumerate() {
            acc[m.element(e)[a]].add(val);
        }
    }
    Ok(acc.iter().map(|c| c.value()).collect())
}
