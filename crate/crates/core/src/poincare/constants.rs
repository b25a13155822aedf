//! One-dimensional sector constants and spherical cap constants.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::config::EIG_TOL;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_mass, assemble_stiffness, generalized_eig_extreme, SparseOperator, Which,
};
use crate::geometry::{Point, SphericalPolygon};
use crate::mesh::SimplicialMesh;

/// Refinement level of the link triangulation used by [`cap_constant`].
pub const CAP_LEVELS: usize = 5;

/// Element count of the 1D cross-check in [`sector_constant_fem`].
pub const SECTOR_FEM_CELLS: usize = 128;

/// Best constant `c` in `int_0^theta |v|^2 <= c int_0^theta |v'|^2` for `v`
/// vanishing at both ends: `1/lambda_1 = (theta/pi)^2`.
pub fn sector_constant(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 2.0 * PI + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "opening angle must lie in (0, 2pi], got {theta}"
        )));
    }
    Ok((theta / PI).powi(2))
}

/// `1/lambda_h` for the P1 Dirichlet eigenproblem `-v'' = lambda v` on
/// `(0, theta)` with `cells` uniform elements.
pub fn sector_constant_fem(theta: f64, cells: usize) -> Result<f64> {
    sector_constant(theta)?;
    if cells < 2 {
        return Err(Error::InvalidArgument("need at least two cells".into()));
    }
    let h = theta / cells as f64;
    let n = cells - 1;
    let mut k = Vec::with_capacity(3 * n);
    let mut m = Vec::with_capacity(3 * n);
    for i in 0..n {
        k.push((i, i, 2.0 / h));
        m.push((i, i, 4.0 * h / 6.0));
        if i + 1 < n {
            for (a, b) in [(i, i + 1), (i + 1, i)] {
                k.push((a, b, -1.0 / h));
                m.push((a, b, h / 6.0));
            }
        }
    }
    let k = SparseOperator::from_triplets(n, &k, true);
    let m = SparseOperator::from_triplets(n, &m, true);
    let pair = generalized_eig_extreme(&k, &m, Which::Smallest, EIG_TOL)?;
    Ok(1.0 / pair.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct CapConstant {
    /// `C_v = 1/lambda_1`.
    pub value: f64,
    pub lambda1: f64,
    pub levels: usize,
    pub nodes: usize,
}

/// Triangulation of a spherical polygon: its coarse geodesic triangles,
/// red-refined `levels` times with new nodes projected onto the sphere.
pub fn link_mesh(omega: &SphericalPolygon, levels: usize) -> Result<SimplicialMesh> {
    let key = |p: &Point| {
        [
            (p.x * 1e9).round() as i64,
            (p.y * 1e9).round() as i64,
            (p.z * 1e9).round() as i64,
        ]
    };
    let mut index: BTreeMap<[i64; 3], usize> = BTreeMap::new();
    let mut nodes: Vec<Point> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for t in omega.triangles() {
        let mut ids = [0; 3];
        for (slot, p) in ids.iter_mut().zip(&t) {
            let p = p.normalize();
            *slot = *index.entry(key(&p)).or_insert_with(|| {
                nodes.push(p);
                nodes.len() - 1
            });
        }
        tris.push(ids);
    }
    for _ in 0..levels {
        let mut mid: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(4 * tris.len());
        for t in &tris {
            let mut m = [0; 3];
            for (k, slot) in m.iter_mut().enumerate() {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = [a.min(b), a.max(b)];
                *slot = *mid.entry(e).or_insert_with(|| {
                    nodes.push((nodes[a] + nodes[b]).normalize());
                    nodes.len() - 1
                });
            }
            // m[0] on edge 01, m[1] on 12, m[2] on 20.
            next.push([t[0], m[0], m[2]]);
            next.push([m[0], t[1], m[1]]);
            next.push([m[2], m[1], t[2]]);
            next.push([m[0], m[1], m[2]]);
        }
        tris = next;
    }
    SimplicialMesh::surface(nodes, tris.into_iter().flatten().collect())
}

/// Smallest Dirichlet eigenvalue of the Laplace-Beltrami operator on `omega`.
pub fn cap_eigenvalue(omega: &SphericalPolygon, levels: usize) -> Result<(f64, usize)> {
    let mesh = link_mesh(omega, levels)?;
    let interior = mesh.interior_nodes();
    if interior.is_empty() {
        return Err(Error::MeshTooCoarse(format!(
            "link triangulation at level {levels} has no interior node"
        )));
    }
    let k = assemble_stiffness(&mesh).restrict(&interior);
    let m = assemble_mass(&mesh).restrict(&interior);
    let pair = generalized_eig_extreme(&k, &m, Which::Smallest, EIG_TOL)?;
    Ok((pair.value, mesh.num_nodes()))
}

/// Poincaré constant of the spherical polygon, by surface finite elements
/// at [`CAP_LEVELS`].
pub fn cap_constant(omega: &SphericalPolygon) -> Result<CapConstant> {
    cap_constant_at(omega, CAP_LEVELS)
}

pub fn cap_constant_at(omega: &SphericalPolygon, levels: usize) -> Result<CapConstant> {
    let (lambda1, nodes) = cap_eigenvalue(omega, levels)?;
    if !(lambda1 > 0.0) {
        return Err(Error::Degenerate(format!(
            "link eigenvalue {lambda1} is not positive"
        )));
    }
    Ok(CapConstant {
        value: 1.0 / lambda1,
        lambda1,
        levels,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_examples() {
        assert!((sector_constant(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((sector_constant(PI / 2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(sector_constant(0.0).is_err());
        assert!(sector_constant(7.0).is_err());
    }

    #[test]
    fn sector_fem_matches_analytic() {
        for theta in [PI / 2.0, PI, 1.5 * PI, 2.0 * PI] {
            let exact = sector_constant(theta).unwrap();
            let fem = sector_constant_fem(theta, SECTOR_FEM_CELLS).unwrap();
            // The discrete eigenvalue overestimates lambda_1, so c_h < c.
            assert!(
                fem < exact && (exact - fem) / exact < 1e-3,
                "{theta}: {fem} vs {exact}"
            );
        }
    }

    #[test]
    fn link_mesh_area_converges() {
        let h = SphericalPolygon::hemisphere();
        let m = link_mesh(&h, 4).unwrap();
        assert!((m.total_measure() - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        assert_eq!(m.num_elements(), 4 * 256);
        for p in m.nodes() {
            assert!((p.norm() - 1.0).abs() < 1e-14);
        }
        // Boundary = the equator.
        for b in m.boundary_nodes() {
            assert!(m.node(b).z.abs() < 1e-14);
        }
    }

    #[test]
    fn hemisphere_and_octant_eigenvalues() {
        // Degree-1 harmonic z on the hemisphere, degree-3 harmonic xyz on the octant.
        let (lh, _) = cap_eigenvalue(&SphericalPolygon::hemisphere(), 4).unwrap();
        assert!((lh - 2.0).abs() < 0.02 * 2.0, "{lh}");
        let (lo, _) = cap_eigenvalue(&SphericalPolygon::octant(), 5).unwrap();
        assert!((lo - 12.0).abs() < 0.02 * 12.0, "{lo}");
        assert!(lo > lh);
    }

    #[test]
    fn degenerate_links_are_rejected() {
        let all: Vec<[f64; 3]> = (0..8)
            .map(|i| {
                [
                    if i & 1 == 0 { 1.0 } else { -1.0 },
                    if i & 2 == 0 { 1.0 } else { -1.0 },
                    if i & 4 == 0 { 1.0 } else { -1.0 },
                ]
            })
            .collect();
        assert!(SphericalPolygon::from_octants(&all).is_err());
    }

    #[test]
    fn octant_self_convergence_regression() {
        // Level 5 frozen; levels 4..6 converge at second order towards 12.
        let l: Vec<f64> = (4..=6)
            .map(|k| cap_eigenvalue(&SphericalPolygon::octant(), k).unwrap().0)
            .collect();
        assert!((l[1] - 12.054018501474).abs() < 1e-8, "{}", l[1]);
        let ratio = (l[0] - l[1]) / (l[1] - l[2]);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
        let extrapolated = l[2] - (l[1] - l[2]) / 3.0;
        assert!((extrapolated - 12.0).abs() < 1e-3, "{extrapolated}");
    }
}
