use std::f64::consts::PI;

use serde::Serialize;

use super::constants::{
    cap_constant_at, sector_constant, sector_constant_fem, CAP_LEVELS, SECTOR_FEM_CELLS,
};
use super::region::{Decomposition, Region, RegionKind};
use crate::config::EIG_TOL;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_mass, assemble_stiffness, assemble_weighted_mass, generalized_eig_extreme, QuadPolicy,
    Which,
};
use crate::geometry::{Point, Polyhedron};
use crate::mesh::{refine, GradingSpec, SimplicialMesh};
use crate::numeric::par_map;
pub use crate::report::Provenance;
use crate::weights::{interior_samples, WeightField};

/// Residual-set sample count.
const RESIDUAL_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Serialize)]
pub struct RegionConstant {
    pub label: String,
    pub kind: RegionKind,
    /// Regional Poincaré constant: `(theta/pi)^2` or `C_v`.
    pub constant: f64,
    pub provenance: Provenance,
    pub theta: Option<f64>,
    /// The one-dimensional factor `pi/theta` as printed in the source
    /// argument, kept next to the eigenvalue-derived constant.
    pub stated_factor: Option<f64>,
    /// 1D finite element value of the sector constant, or the coarser-level
    /// cap constant for balls.
    pub cross_check: Option<f64>,
    /// Balls only: lower bound of `eta/rho` on the ball outside all
    /// cylinders and cones.
    pub eta_ratio: Option<f64>,
    /// Contribution to the assembled constant (`constant / eta_ratio^2` for balls).
    pub effective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualBound {
    pub eta_min_sampled: f64,
    pub eta_min_offset: f64,
    pub eta_min: f64,
    /// Plain Poincaré constant `1/lambda_1` on the mesh and on its refinement.
    pub poincare_constant_coarse: f64,
    pub poincare_constant: f64,
    pub provenance: Provenance,
    /// `C_P / eta_min^2`.
    pub effective: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaTerm {
    pub name: String,
    pub value: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalKappa {
    pub value: f64,
    pub lambda_max: f64,
    pub iterations: usize,
    pub residual: f64,
    pub interior_nodes: usize,
    /// Nodal values of the discrete maximizer (zero on the boundary).
    #[serde(skip)]
    pub maximizer: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareCertificate {
    pub epsilon: f64,
    pub delta: f64,
    pub regions: Vec<RegionConstant>,
    pub residual: ResidualBound,
    /// One term per region kind (the largest regional contribution, since
    /// regions of one kind are disjoint) plus the residual term.
    pub terms: Vec<KappaTerm>,
    pub assembled_constant: f64,
    pub constructive_kappa: f64,
    pub variational_kappa: VariationalKappa,
    /// Estimated discretization error of the eigensolve-derived terms.
    pub slack: f64,
    pub passed: bool,
}

/// Smallest Dirichlet eigenvalue of `-Laplace` on the mesh.
pub fn dirichlet_eigenvalue(m: &SimplicialMesh) -> Result<f64> {
    let interior = m.interior_nodes();
    if interior.is_empty() {
        return Err(Error::MeshTooCoarse("no interior node".into()));
    }
    let k = assemble_stiffness(m).restrict(&interior);
    let b = assemble_mass(m).restrict(&interior);
    Ok(generalized_eig_extreme(&k, &b, Which::Smallest, EIG_TOL)?.value)
}

/// `1 + lambda_max` for `M_{w^-2} v = lambda K v` on the zero-trace subspace,
/// so that `int |u|^2/w^2 + int |grad u|^2 <= value * int |grad u|^2` for
/// every zero-trace P1 field, with equality at the maximizer.
pub fn variational_kappa(m: &SimplicialMesh, w: &WeightField) -> Result<VariationalKappa> {
    let interior = m.interior_nodes();
    if interior.is_empty() {
        return Err(Error::MeshTooCoarse("zero-trace subspace is empty".into()));
    }
    let weight = |x: &Point| -> Result<f64> { Ok(w.eval(x)?.powi(-2)) };
    let mw = assemble_weighted_mass(m, &weight, QuadPolicy::default())?.restrict(&interior);
    let k = assemble_stiffness(m).restrict(&interior);
    let pair = generalized_eig_extreme(&mw, &k, Which::Largest, EIG_TOL)?;
    let mut maximizer = vec![0.0; m.num_nodes()];
    for (&i, v) in interior.iter().zip(&pair.vector) {
        maximizer[i] = *v;
    }
    Ok(VariationalKappa {
        value: 1.0 + pair.value,
        lambda_max: pair.value,
        iterations: pair.iterations,
        residual: pair.residual,
        interior_nodes: interior.len(),
        maximizer,
    })
}

/// Lower bound of `eta/rho` on a vertex ball minus the cylinders and cones:
/// the exact offset bound, reduced further if sampling finds a smaller ratio.
fn ball_ratio(p: &Polyhedron, dec: &Decomposition, ball: &Region) -> Result<f64> {
    let v = ball.vertex.unwrap_or(0);
    let (eps, delta) = (dec.epsilon, dec.delta);
    let slope = delta / (eps * eps + delta * delta).sqrt();
    let apex = p.vertex(v);
    let far = p
        .edges()
        .iter()
        .filter(|e| !e.contains(&v))
        .map(|&[a, b]| {
            crate::geometry::planar::point_segment_distance(&apex, &p.vertex(a), &p.vertex(b))
        })
        .fold(f64::INFINITY, f64::min);
    let mut ratio = (slope / (1.0 + slope * slope).sqrt())
        .min(delta / (2.0 * eps))
        .min((far - 2.0 * eps) / (2.0 * eps));
    let others: Vec<&Region> = dec
        .regions
        .iter()
        .filter(|r| matches!(r.kind, RegionKind::EdgeCylinder | RegionKind::VertexCone))
        .collect();
    let n = dec.samples_per_region as u64;
    for i in 0..n {
        let q = crate::numeric::halton_point(i + 7919, 3);
        let c = 2.0 * q[0] - 1.0;
        let s = (1.0 - c * c).sqrt();
        let t = 2.0 * PI * q[1];
        let x = apex + Point::new(s * t.cos(), s * t.sin(), c) * (ball.radius * q[2].cbrt());
        if !p.contains_strict(&x) || others.iter().any(|r| r.in_shape(&x)) {
            continue;
        }
        ratio = ratio.min(p.distance_to_singular(&x) / (x - apex).norm());
    }
    if !(ratio > 0.0) {
        return Err(Error::Certificate(format!(
            "{}: eta/rho is not bounded below",
            ball.label()
        )));
    }
    Ok(ratio)
}

/// Richardson estimate of the error left in `1/lambda` at the finer level,
/// for eigenvalues converging at second order.
fn inverse_slack(lambda_coarse: f64, lambda_fine: f64) -> f64 {
    let limit = lambda_fine - (lambda_coarse - lambda_fine) / 3.0;
    (1.0 / limit - 1.0 / lambda_fine).max(0.0)
}

/// Assembles the constructive constant from the cover and compares it with
/// the variational constant on `mesh`.
pub fn constructive_kappa(
    p: &Polyhedron,
    dec: &Decomposition,
    mesh: &SimplicialMesh,
) -> Result<PoincareCertificate> {
    if mesh.dim() != p.dim() || dec.dim != p.dim() {
        return Err(Error::InvalidArgument(
            "domain, mesh and decomposition dimensions differ".into(),
        ));
    }
    let entries: Vec<Result<(RegionConstant, f64)>> =
        par_map(&dec.regions, |r| -> Result<(RegionConstant, f64)> {
            match r.kind {
                RegionKind::VertexBall => {
                    let link = r
                        .link
                        .as_ref()
                        .ok_or_else(|| Error::Certificate(format!("{} has no link", r.label())))?;
                    let fine = cap_constant_at(link, CAP_LEVELS)?;
                    let coarse = cap_constant_at(link, CAP_LEVELS - 1)?;
                    let ratio = ball_ratio(p, dec, r)?;
                    let slack = inverse_slack(coarse.lambda1, fine.lambda1) / (ratio * ratio);
                    Ok((
                        RegionConstant {
                            label: r.label(),
                            kind: r.kind,
                            constant: fine.value,
                            provenance: Provenance::Eigensolve,
                            theta: None,
                            stated_factor: None,
                            cross_check: Some(coarse.value),
                            eta_ratio: Some(ratio),
                            effective: fine.value / (ratio * ratio),
                        },
                        slack,
                    ))
                }
                _ => {
                    let theta = r
                        .theta
                        .ok_or_else(|| Error::Certificate(format!("{} has no angle", r.label())))?;
                    let c = sector_constant(theta)?;
                    Ok((
                        RegionConstant {
                            label: r.label(),
                            kind: r.kind,
                            constant: c,
                            provenance: Provenance::Analytic,
                            theta: Some(theta),
                            stated_factor: Some(PI / theta),
                            cross_check: Some(sector_constant_fem(theta, SECTOR_FEM_CELLS)?),
                            eta_ratio: None,
                            effective: c,
                        },
                        0.0,
                    ))
                }
            }
        });
    let mut regions = Vec::with_capacity(entries.len());
    let mut slacks = Vec::with_capacity(entries.len());
    for e in entries {
        let (r, s) = e?;
        regions.push(r);
        slacks.push(s);
    }

    // Residual set: outside every region eta >= delta (3D) or epsilon (2D).
    let offset = if p.dim() == 2 {
        dec.epsilon
    } else {
        dec.delta.min(3f64.sqrt() * dec.epsilon)
    };
    let samples = interior_samples(p, RESIDUAL_SAMPLES);
    let sampled = samples
        .iter()
        .filter(|x| !dec.covers(p, x))
        .map(|x| p.distance_to_singular(x))
        .fold(f64::INFINITY, f64::min);
    let eta_min = offset.min(sampled);
    if !(eta_min > 0.0) {
        return Err(Error::Certificate(
            "residual set touches the singular set".into(),
        ));
    }
    let lambda_coarse = dirichlet_eigenvalue(mesh)?;
    let fine_mesh = refine(mesh, &GradingSpec::uniform(1), p)?;
    let lambda_fine = dirichlet_eigenvalue(&fine_mesh)?;
    let cp = 1.0 / lambda_fine;
    let residual = ResidualBound {
        eta_min_sampled: sampled,
        eta_min_offset: offset,
        eta_min,
        poincare_constant_coarse: 1.0 / lambda_coarse,
        poincare_constant: cp,
        provenance: Provenance::Eigensolve,
        effective: cp / (eta_min * eta_min),
        samples: RESIDUAL_SAMPLES,
    };

    let kinds: &[(RegionKind, &str)] = if p.dim() == 2 {
        &[(RegionKind::VertexSector, "vertex sectors")]
    } else {
        &[
            (RegionKind::EdgeCylinder, "edge cylinders"),
            (RegionKind::VertexCone, "vertex cones"),
            (RegionKind::VertexBall, "vertex balls"),
        ]
    };
    let mut terms = Vec::new();
    for &(kind, name) in kinds {
        let mut best = (0.0, 0.0);
        for (r, &s) in regions.iter().zip(&slacks) {
            if r.kind == kind && r.effective + s > best.0 + best.1 {
                best = (r.effective, s);
            }
        }
        terms.push(KappaTerm {
            name: name.into(),
            value: best.0,
            slack: best.1,
        });
    }
    terms.push(KappaTerm {
        name: "residual".into(),
        value: residual.effective,
        slack: inverse_slack(lambda_coarse, lambda_fine) / (eta_min * eta_min),
    });
    let assembled: f64 = terms.iter().map(|t| t.value).sum();
    let slack: f64 = terms.iter().map(|t| t.slack).sum();
    let constructive = 1.0 + assembled;
    let variational = variational_kappa(mesh, &WeightField::eta(p))?;
    let passed = variational.value <= constructive + slack;
    Ok(PoincareCertificate {
        epsilon: dec.epsilon,
        delta: dec.delta,
        regions,
        residual,
        terms,
        assembled_constant: assembled,
        constructive_kappa: constructive,
        variational_kappa: variational,
        slack,
        passed,
    })
}
