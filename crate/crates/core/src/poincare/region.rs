use std::f64::consts::PI;

use serde::Serialize;

use super::constants::{cap_constant, sector_constant};
use crate::error::{Error, Result};
use crate::fem::{assemble_stiffness, element_geometry, ElementRules, FemField, QuadPolicy};
use crate::geometry::{Point, Polyhedron, SphericalPolygon};
use crate::numeric::{halton_point, par_map_range, sum};

/// Halvings of `(epsilon, delta)` tried before giving up.
pub const MAX_HALVINGS: usize = 20;

/// Sample count per region for the decomposition checks.
pub const SAMPLES_PER_REGION: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    EdgeCylinder,
    VertexCone,
    VertexBall,
    VertexSector,
}

/// One piece of the cover.
///
/// Cylinders, cones and sectors carry a cylindrical frame: `origin` (base
/// centre, apex or corner), unit `axis` along the edge (the plane normal for
/// sectors) and an orthonormal pair `frame` spanning the cross-section with
/// the domain occupying angles `(0, theta)`. Balls carry their link.
#[derive(Debug, Clone, Serialize)]
pub struct Region {
    pub kind: RegionKind,
    pub vertex: Option<usize>,
    pub edge: Option<usize>,
    pub origin: [f64; 3],
    pub axis: [f64; 3],
    pub frame: [[f64; 3]; 2],
    /// `r_e` for cylinders, `2 epsilon` for balls, `epsilon` for sectors.
    pub radius: f64,
    /// `z_e = |e| - 2 epsilon` for cylinders, `epsilon` for cones.
    pub length: f64,
    /// Cone opening `r < slope * z`.
    pub slope: f64,
    pub theta: Option<f64>,
    #[serde(skip)]
    pub link: Option<SphericalPolygon>,
}

fn pt(a: &[f64; 3]) -> Point {
    Point::new(a[0], a[1], a[2])
}

fn arr(p: &Point) -> [f64; 3] {
    [p.x, p.y, p.z]
}

impl Region {
    /// Axial coordinate, radius and angle in `[0, 2pi)` of `x`.
    pub fn cylindrical(&self, x: &Point) -> (f64, f64, f64) {
        let q = x - pt(&self.origin);
        let z = q.dot(&pt(&self.axis));
        let (e1, e2) = (pt(&self.frame[0]), pt(&self.frame[1]));
        let (a, b) = (q.dot(&e1), q.dot(&e2));
        let r = (a * a + b * b).sqrt();
        let t = b.atan2(a);
        (z, r, if t < 0.0 { t + 2.0 * PI } else { t })
    }

    /// Membership in the geometric cylinder/cone/ball, ignoring the domain.
    pub fn in_shape(&self, x: &Point) -> bool {
        match self.kind {
            RegionKind::EdgeCylinder => {
                let (z, r, _) = self.cylindrical(x);
                z > 0.0 && z < self.length && r < self.radius
            }
            RegionKind::VertexCone => {
                let (z, r, _) = self.cylindrical(x);
                z > 0.0 && z < self.length && r < self.slope * z
            }
            RegionKind::VertexBall | RegionKind::VertexSector => {
                (x - pt(&self.origin)).norm() < self.radius
            }
        }
    }

    /// Membership in the region `Omega ∩ shape`.
    pub fn contains(&self, p: &Polyhedron, x: &Point) -> bool {
        self.in_shape(x) && p.contains_strict(x)
    }

    /// The variable of the regional inequality: the cylindrical radius for
    /// cylinders, cones and sectors, the distance to the vertex for balls.
    pub fn radial(&self, x: &Point) -> f64 {
        match self.kind {
            RegionKind::VertexBall | RegionKind::VertexSector => (x - pt(&self.origin)).norm(),
            _ => self.cylindrical(x).1,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            RegionKind::EdgeCylinder => format!("cylinder e{}", self.edge.unwrap_or(0)),
            RegionKind::VertexCone => format!(
                "cone v{}/e{}",
                self.vertex.unwrap_or(0),
                self.edge.unwrap_or(0)
            ),
            RegionKind::VertexBall => format!("ball v{}", self.vertex.unwrap_or(0)),
            RegionKind::VertexSector => format!("sector v{}", self.vertex.unwrap_or(0)),
        }
    }

    /// The constant of the regional inequality: `(theta/pi)^2` for
    /// cylinders, cones and sectors, `C_v` of the link for balls.
    pub fn constant(&self) -> Result<f64> {
        match (self.kind, self.theta, &self.link) {
            (RegionKind::VertexBall, _, Some(link)) => Ok(cap_constant(link)?.value),
            (_, Some(theta), _) => sector_constant(theta),
            _ => Err(Error::InvalidArgument(format!(
                "{} has no constant",
                self.label()
            ))),
        }
    }

    /// Quasi-random points filling the geometric shape.
    fn samples(&self, count: usize) -> Vec<Point> {
        let o = pt(&self.origin);
        let axis = pt(&self.axis);
        let (e1, e2) = (pt(&self.frame[0]), pt(&self.frame[1]));
        (0..count as u64)
            .map(|i| {
                let q = halton_point(i, 3);
                match self.kind {
                    RegionKind::EdgeCylinder => {
                        let (r, t, z) = (
                            self.radius * q[0].sqrt(),
                            2.0 * PI * q[1],
                            self.length * q[2],
                        );
                        o + axis * z + (e1 * t.cos() + e2 * t.sin()) * r
                    }
                    RegionKind::VertexCone => {
                        let z = self.length * q[2].cbrt();
                        let (r, t) = (self.slope * z * q[0].sqrt(), 2.0 * PI * q[1]);
                        o + axis * z + (e1 * t.cos() + e2 * t.sin()) * r
                    }
                    RegionKind::VertexSector => {
                        let (r, t) = (self.radius * q[0].sqrt(), 2.0 * PI * q[1]);
                        o + (e1 * t.cos() + e2 * t.sin()) * r
                    }
                    RegionKind::VertexBall => {
                        let c = 2.0 * q[0] - 1.0;
                        let s = (1.0 - c * c).sqrt();
                        let t = 2.0 * PI * q[1];
                        let dir = Point::new(s * t.cos(), s * t.sin(), c);
                        o + dir * (self.radius * q[2].cbrt())
                    }
                }
            })
            .collect()
    }
}

/// A cover of the domain by the regions built from `(epsilon, delta)`.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub dim: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub halvings: usize,
    pub regions: Vec<Region>,
    pub samples_per_region: usize,
}

impl Decomposition {
    pub fn of_kind(&self, kind: RegionKind) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(move |r| r.kind == kind)
    }

    /// True when `x` lies in some region.
    pub fn covers(&self, p: &Polyhedron, x: &Point) -> bool {
        self.regions.iter().any(|r| r.contains(p, x))
    }
}

/// In-domain wedge frame at an edge: `e1` points into the first face, `e2`
/// completes a frame in which the domain occupies angles `(0, theta)`.
fn edge_frame(p: &Polyhedron, e: usize, from: usize) -> Result<(Point, Point, Point, f64)> {
    let [a, b] = p.edges()[e];
    let (s, t) = if from == a { (a, b) } else { (b, a) };
    let axis = (p.vertex(t) - p.vertex(s)).normalize();
    let theta = p.dihedral_angle(e)?;
    let f1 = p.edge_faces()[e][0];
    let n1 = pt(&p.faces()[f1].normal);
    let scale = p.min_edge_length();
    let mid = (p.vertex(a) + p.vertex(b)) * 0.5;
    let mut e1 = axis.cross(&n1).normalize();
    if p.face_distance(f1, &(mid + e1 * (1e-6 * scale))) >= 1e-9 * scale {
        e1 = -e1;
    }
    let mut e2 = axis.cross(&e1);
    // The bisector of the wedge is inside and the bisector of its complement
    // outside; for reflex wedges only the first test would be ambiguous.
    let probe = |e2: &Point, t: f64| {
        p.contains_strict(&(mid + (e1 * t.cos() + e2 * t.sin()) * (1e-4 * scale)))
    };
    let oriented = |e2: &Point| probe(e2, 0.5 * theta) && !probe(e2, PI + 0.5 * theta);
    if !oriented(&e2) {
        e2 = -e2;
    }
    if !oriented(&e2) {
        return Err(Error::Geometry(format!(
            "cannot orient the wedge at edge {e}"
        )));
    }
    Ok((axis, e1, e2, theta))
}

fn sector_frame(p: &Polyhedron, v: usize) -> Result<(Point, Point, f64)> {
    let n = p.num_vertices();
    let c = p.vertex(v);
    let e1 = (p.vertex((v + 1) % n) - c).normalize();
    let e2 = Point::new(-e1.y, e1.x, 0.0);
    Ok((e1, e2, p.interior_angle(v)?))
}

fn regions_for(p: &Polyhedron, eps: f64, delta: f64) -> Result<Vec<Region>> {
    let mut out = Vec::new();
    if p.dim() == 2 {
        for v in 0..p.num_vertices() {
            let (e1, e2, theta) = sector_frame(p, v)?;
            out.push(Region {
                kind: RegionKind::VertexSector,
                vertex: Some(v),
                edge: None,
                origin: arr(&p.vertex(v)),
                axis: [0.0, 0.0, 1.0],
                frame: [arr(&e1), arr(&e2)],
                radius: eps,
                length: 0.0,
                slope: 0.0,
                theta: Some(theta),
                link: None,
            });
        }
        return Ok(out);
    }
    let slope = delta / (eps * eps + delta * delta).sqrt();
    for (e, &[a, b]) in p.edges().iter().enumerate() {
        let (axis, e1, e2, theta) = edge_frame(p, e, a)?;
        out.push(Region {
            kind: RegionKind::EdgeCylinder,
            vertex: None,
            edge: Some(e),
            origin: arr(&(p.vertex(a) + axis * eps)),
            axis: arr(&axis),
            frame: [arr(&e1), arr(&e2)],
            radius: delta,
            length: p.edge_length(e) - 2.0 * eps,
            slope: 0.0,
            theta: Some(theta),
            link: None,
        });
        for v in [a, b] {
            let (axis, e1, e2, theta) = edge_frame(p, e, v)?;
            out.push(Region {
                kind: RegionKind::VertexCone,
                vertex: Some(v),
                edge: Some(e),
                origin: arr(&p.vertex(v)),
                axis: arr(&axis),
                frame: [arr(&e1), arr(&e2)],
                radius: 0.0,
                length: eps,
                slope,
                theta: Some(theta),
                link: None,
            });
        }
    }
    for v in 0..p.num_vertices() {
        out.push(Region {
            kind: RegionKind::VertexBall,
            vertex: Some(v),
            edge: None,
            origin: arr(&p.vertex(v)),
            axis: [0.0; 3],
            frame: [[0.0; 3]; 2],
            radius: 2.0 * eps,
            length: 0.0,
            slope: 0.0,
            theta: None,
            link: Some(p.vertex_link(v)?),
        });
    }
    Ok(out)
}

/// Sampled checks of one region; returns the first violation.
fn check_region(p: &Polyhedron, regions: &[Region], i: usize, samples: usize) -> Option<String> {
    let r = &regions[i];
    let scale = p.min_edge_length().min(p.diameter());
    let edge_tol = 1e-9;
    for x in r.samples(samples) {
        if p.boundary_distance(&x) < 1e-9 * scale {
            continue;
        }
        let inside = p.contains_strict(&x);
        match r.kind {
            RegionKind::VertexBall => {
                let o = pt(&r.origin);
                let probe = o + (x - o).normalize() * (1e-3 * r.radius);
                if p.boundary_distance(&probe) < 1e-9 * r.radius {
                    continue;
                }
                if inside != p.contains_strict(&probe) {
                    return Some(format!(
                        "{}: domain is not a cone over the link at {x:?}",
                        r.label()
                    ));
                }
            }
            _ => {
                let (_, rad, t) = r.cylindrical(&x);
                let theta = r.theta.unwrap_or(0.0);
                if rad < 1e-9 * scale
                    || t.min(2.0 * PI - t) < edge_tol
                    || (t - theta).abs() < edge_tol
                {
                    continue;
                }
                if inside != (t < theta) {
                    return Some(format!(
                        "{}: angular characterization fails at {x:?}",
                        r.label()
                    ));
                }
                if inside {
                    let eta = p.distance_to_singular(&x);
                    if (eta - rad).abs() > 1e-10 {
                        return Some(format!("{}: eta = {eta} differs from r = {rad}", r.label()));
                    }
                }
            }
        }
        if inside {
            for (j, other) in regions.iter().enumerate() {
                if j != i && other.kind == r.kind && other.in_shape(&x) {
                    return Some(format!("{} overlaps {}", r.label(), other.label()));
                }
            }
        }
    }
    None
}

/// Searches `epsilon = l_min/4, delta = epsilon/2`, halving both until every
/// sampled region check passes.
pub fn build_decomposition(p: &Polyhedron) -> Result<Decomposition> {
    let lmin = if p.dim() == 2 {
        let n = p.num_vertices();
        (0..n)
            .map(|i| (p.vertex(i) - p.vertex((i + 1) % n)).norm())
            .fold(f64::INFINITY, f64::min)
    } else {
        p.min_edge_length()
    };
    let mut eps = lmin / 4.0;
    let mut delta = eps / 2.0;
    for halvings in 0..=MAX_HALVINGS {
        let regions = regions_for(p, eps, delta)?;
        let failures = par_map_range(regions.len(), |i| {
            check_region(p, &regions, i, SAMPLES_PER_REGION)
        });
        if failures.iter().all(Option::is_none) {
            return Ok(Decomposition {
                dim: p.dim(),
                epsilon: eps,
                delta,
                halvings,
                regions,
                samples_per_region: SAMPLES_PER_REGION,
            });
        }
        eps *= 0.5;
        delta *= 0.5;
    }
    Err(Error::DecompositionExhausted(MAX_HALVINGS))
}

/// Both sides of one regional inequality for a zero-trace field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionCheck {
    /// `int_region |u|^2 / r^2`, with `r` from [`Region::radial`].
    pub lhs: f64,
    /// `constant * int_Omega |grad u|^2`.
    pub rhs: f64,
    pub constant: f64,
}

pub fn region_inequality_check(
    region: &Region,
    u: &FemField,
    p: &Polyhedron,
) -> Result<RegionCheck> {
    region_inequality_check_with(region, region.constant()?, u, p)
}

/// As [`region_inequality_check`] with a precomputed regional constant.
pub fn region_inequality_check_with(
    region: &Region,
    constant: f64,
    u: &FemField,
    p: &Polyhedron,
) -> Result<RegionCheck> {
    let m = u.mesh_ref();
    if m.dim() != p.dim() {
        return Err(Error::InvalidArgument(
            "mesh and domain dimensions differ".into(),
        ));
    }
    let vals = u.values();
    let rules = ElementRules::new(
        m.dim(),
        QuadPolicy {
            regular: 5,
            singular: 5,
        },
    )?;
    let parts = par_map_range(m.num_elements(), |e| {
        let geo = element_geometry(&m.element_points(e));
        let idx = m.element(e);
        let mut acc = 0.0;
        let mut hits = 0usize;
        for (x, lam, w) in rules.points(m, e, &geo) {
            if !region.in_shape(&x) {
                continue;
            }
            hits += 1;
            let uh: f64 = idx.iter().enumerate().map(|(k, &i)| vals[i] * lam[k]).sum();
            let r = region.radial(&x);
            acc += w * uh * uh / (r * r);
        }
        (acc, hits)
    });
    if parts.iter().all(|&(_, h)| h == 0) {
        return Err(Error::InvalidArgument(format!(
            "{} lies outside the mesh",
            region.label()
        )));
    }
    let lhs = sum(parts.iter().map(|p| p.0));
    let k = assemble_stiffness(m);
    let energy = k.form(vals, vals);
    Ok(RegionCheck {
        lhs,
        rhs: constant * energy,
        constant,
    })
}
