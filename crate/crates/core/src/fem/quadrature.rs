//! Collapsed (Duffy) Gauss-Legendre rules on the reference simplex.

use crate::error::{Error, Result};
use crate::numeric::gauss_legendre_unit;

/// Points in reference coordinates (unused trailing coordinates are zero)
/// with positive weights summing to the reference volume (1/2 or 1/6).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates of point `q` for a simplex of dimension `dim`.
    pub fn barycentric(&self, q: usize, dim: usize) -> [f64; 4] {
        let p = self.points[q];
        let mut out = [0.0; 4];
        out[0] = 1.0 - p[..dim].iter().sum::<f64>();
        out[1..=dim].copy_from_slice(&p[..dim]);
        out
    }
}

/// Rule exact for polynomials of total degree `degree` (1..=5) on the
/// reference triangle (`dim = 2`) or tetrahedron (`dim = 3`).
pub fn quadrature(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if !(1..=5).contains(&degree) {
        return Err(Error::InvalidArgument(format!(
            "unsupported quadrature degree {degree} (1..=5)"
        )));
    }
    match dim {
        2 => {
            let m = (degree + 2).div_ceil(2);
            let (x, w) = gauss_legendre_unit(m);
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let u = x[i];
                    points.push([u, x[j] * (1.0 - u), 0.0]);
                    weights.push(w[i] * w[j] * (1.0 - u));
                }
            }
            Ok(QuadratureRule { points, weights })
        }
        3 => {
            let m = (degree + 3).div_ceil(2);
            let (x, w) = gauss_legendre_unit(m);
            let mut points = Vec::with_capacity(m * m * m);
            let mut weights = Vec::with_capacity(m * m * m);
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let (u, v) = (x[i], x[j]);
                        points.push([u, v * (1.0 - u), x[k] * (1.0 - u) * (1.0 - v)]);
                        weights.push(w[i] * w[j] * w[k] * (1.0 - u).powi(2) * (1.0 - v));
                    }
                }
            }
            Ok(QuadratureRule { points, weights })
        }
        1 => {
            let (x, w) = gauss_legendre_unit(degree.div_ceil(2).max(1));
            Ok(QuadratureRule {
                points: x.iter().map(|&t| [t, 0.0, 0.0]).collect(),
                weights: w,
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "no quadrature for dimension {dim}"
        ))),
    }
}
