use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assembly::{element_geometry, ElementRules, QuadPolicy, ScalarFn, VectorFn};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{ElementLocator, SimplicialMesh};
use crate::numeric::{par_map_range, sum};

/// A P1 field: one coefficient per mesh node.
#[derive(Debug, Clone)]
pub struct FemField<'m> {
    mesh: &'m SimplicialMesh,
    values: Vec<f64>,
}

impl<'m> FemField<'m> {
    pub fn new(mesh: &'m SimplicialMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "field has {} coefficients for {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        Ok(FemField { mesh, values })
    }

    pub fn interpolate(mesh: &'m SimplicialMesh, f: impl Fn(&Point) -> f64) -> Self {
        FemField {
            mesh,
            values: mesh.nodes().iter().map(f).collect(),
        }
    }

    /// Seeded field with independent uniform values in `[-1, 1)` at interior
    /// nodes and zero trace.
    pub fn random_zero_trace(mesh: &'m SimplicialMesh, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..mesh.num_nodes())
            .map(|i| {
                let v: f64 = rng.random_range(-1.0..1.0);
                if mesh.is_boundary_node(i) {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        FemField { mesh, values }
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        self.mesh
    }

    /// The mesh with the field's own lifetime.
    pub fn mesh_ref(&self) -> &'m SimplicialMesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Constant gradient on element `e`.
    pub fn element_gradient(&self, e: usize) -> Point {
        let g = element_geometry(&self.mesh.element_points(e));
        self.mesh
            .element(e)
            .iter()
            .zip(&g.grads)
            .map(|(&i, gr)| gr * self.values[i])
            .sum()
    }

    /// Value at `x`, or `None` outside the mesh.
    pub fn eval(&self, locator: &ElementLocator, x: &Point) -> Option<f64> {
        let (e, lam) = locator.locate(self.mesh, x, 1e-10)?;
        Some(
            self.mesh
                .element(e)
                .iter()
                .zip(&lam)
                .map(|(&i, l)| self.values[i] * l)
                .sum(),
        )
    }

    /// `|| u - u_h ||_{L2}` by quadrature.
    pub fn l2_error(&self, exact: &ScalarFn, policy: QuadPolicy) -> Result<f64> {
        let rules = ElementRules::new(self.mesh.dim(), policy)?;
        let parts = par_map_range(self.mesh.num_elements(), |e| -> Result<f64> {
            let g = element_geometry(&self.mesh.element_points(e));
            let el = self.mesh.element(e);
            let mut acc = 0.0;
            for (x, lam, w) in rules.points(self.mesh, e, &g) {
                let uh: f64 = el
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| self.values[i] * lam[a])
                    .sum();
                acc += w * (exact(&x)? - uh).powi(2);
            }
            Ok(acc)
        });
        Ok(sum(parts.into_iter().collect::<Result<Vec<_>>>()?).sqrt())
    }

    /// `| u - u_h |_{H1}` by quadrature of the exact gradient.
    pub fn h1_seminorm_error(&self, exact_grad: &VectorFn, policy: QuadPolicy) -> Result<f64> {
        let rules = ElementRules::new(self.mesh.dim(), policy)?;
        let parts = par_map_range(self.mesh.num_elements(), |e| -> Result<f64> {
            let g = element_geometry(&self.mesh.element_points(e));
            let gh = self.element_gradient(e);
            let mut acc = 0.0;
            for (x, _, w) in rules.points(self.mesh, e, &g) {
                acc += w * (exact_grad(&x)? - gh).norm_squared();
            }
            Ok(acc)
        });
        Ok(sum(parts.into_iter().collect::<Result<Vec<_>>>()?).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polyhedron;
    use crate::mesh::triangulate;

    #[test]
    fn affine_interpolant_is_exact() {
        let m = triangulate(&Polyhedron::l_shape(), 0.25).unwrap();
        let f = FemField::interpolate(&m, |p| 3.0 * p.x - p.y + 0.5);
        for e in 0..m.num_elements() {
            assert!((f.element_gradient(e) - Point::new(3.0, -1.0, 0.0)).norm() < 1e-13);
        }
        let loc = ElementLocator::new(&m);
        assert!((f.eval(&loc, &Point::new(0.3, 0.7, 0.0)).unwrap() - 0.7).abs() < 1e-13);
        let l2 = f
            .l2_error(&|p| Ok(3.0 * p.x - p.y + 0.5), QuadPolicy::default())
            .unwrap();
        assert!(l2 < 1e-13);
        assert!(FemField::new(&m, vec![0.0; 3]).is_err());
    }
}
