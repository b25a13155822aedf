use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{signed_volume, SimplicialMesh};
use crate::error::{Error, Result};
use crate::geometry::planar::closest_on_segment;
use crate::geometry::{Point, Polyhedron};

/// Uniform refinement count plus a radial grading exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradingSpec {
    pub kappa: f64,
    pub levels: usize,
}

impl GradingSpec {
    pub fn new(kappa: f64, levels: usize) -> Result<Self> {
        let g = GradingSpec { kappa, levels };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(levels: usize) -> Self {
        GradingSpec { kappa: 1.0, levels }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grading exponent must lie in (0,1], got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Red refinement: every triangle into 4, every tetrahedron into 8 (Bey's
/// scheme). Existing nodes keep their indices; edge midpoints follow in
/// sorted edge order. The result is untagged; [`refine`] re-attaches the domain.
pub fn refine_uniform(m: &SimplicialMesh) -> Result<SimplicialMesh> {
    let edges = m.edges();
    let base = m.num_nodes();
    let mid: BTreeMap<[usize; 2], usize> = edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, base + i))
        .collect();
    let mut nodes = m.nodes().to_vec();
    for &[a, b] in &edges {
        nodes.push((m.node(a) + m.node(b)) * 0.5);
    }
    let md = |a: usize, b: usize| mid[&[a.min(b), a.max(b)]];
    let mut elements =
        Vec::with_capacity(m.raw_elements().len() * if m.dim() == 2 { 4 } else { 8 });
    for el in m.elements() {
        if m.dim() == 2 {
            let (a, b, c) = (el[0], el[1], el[2]);
            let (ab, bc, ca) = (md(a, b), md(b, c), md(c, a));
            elements.extend([a, ab, ca, ab, b, bc, ca, bc, c, ab, bc, ca]);
        } else {
            let x = [el[0], el[1], el[2], el[3]];
            let x01 = md(x[0], x[1]);
            let x02 = md(x[0], x[2]);
            let x03 = md(x[0], x[3]);
            let x12 = md(x[1], x[2]);
            let x13 = md(x[1], x[3]);
            let x23 = md(x[2], x[3]);
            elements.extend([
                x[0], x01, x02, x03, //
                x01, x[1], x12, x13, //
                x02, x12, x[2], x23, //
                x03, x13, x23, x[3], //
                x01, x02, x03, x13, //
                x01, x02, x12, x13, //
                x02, x03, x13, x23, //
                x02, x12, x13, x23,
            ]);
        }
    }
    SimplicialMesh::new(m.dim(), nodes, elements)
}

/// Radius of the grading collar: half the smallest distance between two
/// disjoint singular pieces (vertices in 2D, edges in 3D).
pub fn grading_collar(domain: &Polyhedron) -> f64 {
    let mut best = f64::INFINITY;
    if domain.dim() == 2 {
        let v = domain.vertices();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                best = best.min((v[i] - v[j]).norm());
            }
        }
    } else {
        let e = domain.edges();
        for i in 0..e.len() {
            for j in (i + 1)..e.len() {
                if e[i].iter().any(|a| e[j].contains(a)) {
                    continue;
                }
                let d = segment_segment_distance(
                    &domain.vertex(e[i][0]),
                    &domain.vertex(e[i][1]),
                    &domain.vertex(e[j][0]),
                    &domain.vertex(e[j][1]),
                );
                best = best.min(d);
            }
        }
    }
    0.5 * best
}

/// Distance between closed segments `[p1,q1]` and `[p2,q2]`.
pub(crate) fn segment_segment_distance(p1: &Point, q1: &Point, p2: &Point, q2: &Point) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    // The clamped solution is optimal; compare with endpoint projections as a guard.
    let mut d = (c1 - c2).norm();
    for (p, a0, b0) in [(p1, p2, q2), (q1, p2, q2), (p2, p1, q1), (q2, p1, q1)] {
        d = d.min((p - closest_on_segment(p, a0, b0)).norm());
    }
    d
}

/// Applies `levels` red refinements, then the radial grading map
/// `x -> p + (d/R)^(1/kappa - 1) (x - p)`, where `p` is the nearest singular
/// point, `d = |x - p|` and `R` the collar radius, to nodes with `d < R`.
/// Nodes on the singular set and outside the collar do not move, and
/// `kappa = 1` (or zero levels) leaves the uniformly refined mesh untouched.
pub fn refine(m: &SimplicialMesh, g: &GradingSpec, domain: &Polyhedron) -> Result<SimplicialMesh> {
    g.validate()?;
    if g.levels == 0 {
        return Ok(m.clone());
    }
    let mut out = m.clone();
    for _ in 0..g.levels {
        out = refine_uniform(&out)?;
    }
    if g.kappa != 1.0 {
        let r = grading_collar(domain);
        let expo = 1.0 / g.kappa - 1.0;
        let nodes: Vec<Point> = out
            .nodes()
            .iter()
            .map(|x| {
                let p = domain.nearest_singular_point(x);
                let d = (x - p).norm();
                if d < r && d > 0.0 {
                    p + (x - p) * (d / r).powf(expo)
                } else {
                    *x
                }
            })
            .collect();
        out.set_nodes(nodes);
        for e in 0..out.num_elements() {
            if signed_volume(&out.element_points(e)) <= 0.0 {
                return Err(Error::Mesh(format!(
                    "grading inverted element {e}; use a finer base mesh"
                )));
            }
        }
    }
    out.attach_domain(domain)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::triangulate;

    #[test]
    fn uniform_refinement_counts_and_volume() {
        let sq = Polyhedron::unit_square();
        let m = triangulate(&sq, 0.5).unwrap();
        let r = refine(&m, &GradingSpec::uniform(1), &sq).unwrap();
        assert_eq!(r.num_elements(), 32);
        assert!((r.total_measure() - 1.0).abs() < 1e-14);
        let b = Polyhedron::unit_box();
        let mb = triangulate(&b, 1.0).unwrap();
        let rb = refine(&mb, &GradingSpec::uniform(2), &b).unwrap();
        assert_eq!(rb.num_elements(), 6 * 64);
        assert!((rb.total_measure() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_levels_is_identity() {
        let l = Polyhedron::l_shape();
        let m = triangulate(&l, 0.5).unwrap();
        assert_eq!(
            refine(&m, &GradingSpec::new(0.5, 0).unwrap(), &l).unwrap(),
            m
        );
    }

    #[test]
    fn grading_squares_the_corner_size() {
        let l = Polyhedron::l_shape();
        let m = triangulate(&l, 0.5).unwrap();
        let near = |mesh: &SimplicialMesh| {
            (0..mesh.num_elements())
                .filter(|&e| mesh.element(e).iter().any(|&i| mesh.node(i).norm() < 1e-14))
                .map(|e| mesh.element_diameter(e))
                .fold(f64::INFINITY, f64::min)
        };
        for levels in [2, 3] {
            let u = refine(&m, &GradingSpec::uniform(levels), &l).unwrap();
            let gr = refine(&m, &GradingSpec::new(0.5, levels).unwrap(), &l).unwrap();
            let (du, dg) = (near(&u), near(&gr));
            // Axis neighbours of the corner at distance h land at h^2/R (R = 1/2),
            // so the smallest corner element has diameter sqrt(2)*2h^2 while the
            // uniform one has sqrt(2)*h: the ratio dg/du^2 is sqrt(2) at every level.
            assert!((dg / (du * du) - 2f64.sqrt()).abs() < 1e-12, "{du} {dg}");
        }
        let u = refine(&m, &GradingSpec::uniform(2), &l).unwrap();
        let gr = refine(&m, &GradingSpec::new(0.5, 2).unwrap(), &l).unwrap();
        assert!((gr.total_measure() - 3.0).abs() < 1e-12);
        for s in gr.singular_nodes() {
            assert!(u.nodes().iter().any(|p| (p - gr.node(s)).norm() == 0.0));
        }
    }

    #[test]
    fn collar_radii() {
        assert_eq!(grading_collar(&Polyhedron::unit_square()), 0.5);
        assert_eq!(grading_collar(&Polyhedron::l_shape()), 0.5);
        assert!((grading_collar(&Polyhedron::unit_box()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_kappa() {
        assert!(GradingSpec::new(0.0, 1).is_err());
        assert!(GradingSpec::new(1.5, 1).is_err());
    }
}
