//! Distance weights: the distance `eta` to the singular set and the smooth
//! equivalent weight `r_omega` built from rescaled metrics.
//!
//! In 2D, `r_omega = rt0` where `rt0 = rho_smooth(|x - vertices|, s0)`.
//! In 3D the second factor `rt1 = rho_smooth(rho1, s1)` uses the distance
//! `rho1` to the edges in the metric `rt0^-2 g_euclid`. Nodal values come
//! from shortest paths on the mesh edge graph (edge length
//! `|e| / rt0(midpoint)`). At a point `x`, `rho1` is the shorter of two
//! paths: the straight leg to the nearest interior point of a singular edge,
//! and a node of the containing element plus the leg from `x` to that node.
//! Plain linear interpolation of the nodal values would vanish on boundary
//! facets whose nodes all lie on edges, where `eta` does not.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polyhedron};
use crate::mesh::{ElementLocator, NodeFlag, SimplicialMesh};
use crate::numeric::{gauss_legendre_unit, halton_point};

/// Quadrature points for metric lengths of straight legs.
const LEG_POINTS: usize = 4;

/// Distance from `x` to the singular set. Errors if `x` is outside the closed domain.
pub fn eta(p: &Polyhedron, x: &Point) -> Result<f64> {
    if !p.contains(x, 1e-9 * p.diameter()) {
        return Err(Error::OutsideDomain([x.x, x.y, x.z]));
    }
    Ok(p.distance_to_singular(x))
}

/// C^1 monotone smoothing of a distance.
///
/// `rho` itself for `rho <= s`, and `(rho + s + s ln(rho/s)) / 2` beyond,
/// which stays in `[rho/2, rho]` for every `rho`.
pub fn rho_smooth(rho: f64, s: f64) -> f64 {
    if rho <= s {
        rho
    } else {
        0.5 * (rho + s + s * (rho / s).ln())
    }
}

/// Derivative of [`rho_smooth`] in `rho`.
pub fn rho_smooth_derivative(rho: f64, s: f64) -> f64 {
    if rho <= s {
        1.0
    } else {
        0.5 * (1.0 + s / rho)
    }
}

/// Default smoothing scale for the vertex factor: a quarter of the smallest
/// vertex-to-vertex distance.
pub fn vertex_scale(p: &Polyhedron) -> f64 {
    let v = p.vertices();
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            best = best.min((v[i] - v[j]).norm());
        }
    }
    0.25 * best
}

/// Default smoothing scale for the edge factor (3D): a quarter of the
/// smallest angle between two edges meeting at a vertex. Near a vertex the
/// rescaled metric measures angles, so this is the matching length.
pub fn edge_scale(p: &Polyhedron) -> f64 {
    let mut best = std::f64::consts::PI;
    for v in 0..p.num_vertices() {
        let dirs: Vec<Point> = p
            .edges()
            .iter()
            .filter(|e| e.contains(&v))
            .map(|&[a, b]| {
                let o = if a == v { b } else { a };
                (p.vertex(o) - p.vertex(v)).normalize()
            })
            .collect();
        for i in 0..dirs.len() {
            for j in (i + 1)..dirs.len() {
                best = best.min(dirs[i].dot(&dirs[j]).clamp(-1.0, 1.0).acos());
            }
        }
    }
    0.25 * best
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra over the node graph.
fn dijkstra(adj: &[Vec<(usize, f64)>], sources: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

/// Precomputed data for evaluating `r_omega` on a mesh.
#[derive(Debug, Clone)]
pub struct ROmega {
    domain: Polyhedron,
    s0: f64,
    s1: f64,
    mesh: Option<(SimplicialMesh, ElementLocator, Vec<f64>)>,
    gauss: (Vec<f64>, Vec<f64>),
}

impl ROmega {
    pub fn new(p: &Polyhedron, mesh: &SimplicialMesh) -> Result<Self> {
        let s0 = vertex_scale(p);
        let s1 = edge_scale(p);
        if p.dim() == 2 {
            return Ok(ROmega {
                domain: p.clone(),
                s0,
                s1,
                mesh: None,
                gauss: gauss_legendre_unit(LEG_POINTS),
            });
        }
        if mesh.dim() != 3 {
            return Err(Error::InvalidArgument(
                "r_omega in 3D needs a tetrahedral mesh".into(),
            ));
        }
        let flags = mesh.flags();
        for e in 0..mesh.num_elements() {
            if mesh
                .element(e)
                .iter()
                .all(|&i| flags[i] == NodeFlag::BoundarySingular)
            {
                return Err(Error::MeshTooCoarse(format!(
                    "element {e} has all nodes on the singular set"
                )));
            }
        }
        let rt0 = |x: &Point| rho_smooth(p.distance_to_vertices(x), s0);
        let mut adj = vec![Vec::new(); mesh.num_nodes()];
        for [a, b] in mesh.edges() {
            let (xa, xb) = (mesh.node(a), mesh.node(b));
            let w = (xa - xb).norm() / rt0(&((xa + xb) * 0.5));
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let sources = mesh.singular_nodes();
        if sources.is_empty() {
            return Err(Error::MeshTooCoarse(
                "no mesh node on the singular set".into(),
            ));
        }
        let dist = dijkstra(&adj, &sources);
        if dist.iter().any(|d| !d.is_finite()) {
            return Err(Error::MeshTooCoarse(
                "node graph is disconnected from the edges".into(),
            ));
        }
        let loc = ElementLocator::new(mesh);
        Ok(ROmega {
            domain: p.clone(),
            s0,
            s1,
            mesh: Some((mesh.clone(), loc, dist)),
            gauss: gauss_legendre_unit(LEG_POINTS),
        })
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.s0, self.s1)
    }

    /// Smoothed vertex distance.
    pub fn rt0(&self, x: &Point) -> f64 {
        rho_smooth(self.domain.distance_to_vertices(x), self.s0)
    }

    /// Metric length of the segment `a -> b`, by Gauss-Legendre quadrature.
    fn leg(&self, a: &Point, b: &Point) -> f64 {
        let len = (b - a).norm();
        if len == 0.0 {
            return 0.0;
        }
        let (t, w) = &self.gauss;
        t.iter()
            .zip(w)
            .map(|(t, w)| w * len / self.rt0(&(a + (b - a) * *t)))
            .sum()
    }

    /// Rescaled-metric edge distance at `x` (3D only).
    pub fn rho1(&self, x: &Point) -> Result<f64> {
        let (mesh, loc, dist) = self
            .mesh
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("rho1 is defined in 3D".into()))?;
        let (e, _) = loc
            .locate(mesh, x, 1e-10)
            .ok_or(Error::OutsideDomain([x.x, x.y, x.z]))?;
        let mut best = f64::INFINITY;
        for &[a, b] in self.domain.singular_edges() {
            let (pa, pb) = (self.domain.vertex(a), self.domain.vertex(b));
            let d = pb - pa;
            let t = (x - pa).dot(&d) / d.norm_squared();
            // A nearest point at an endpoint is a vertex, where the metric blows up.
            if t > 0.0 && t < 1.0 {
                best = best.min(self.leg(x, &(pa + d * t)));
            }
        }
        for &i in mesh.element(e) {
            let xi = mesh.node(i);
            if self.rt0(&xi) > 0.0 {
                best = best.min(dist[i] + self.leg(x, &xi));
            }
        }
        Ok(best)
    }

    /// `grad r_omega / r_omega`. The edge factor is differentiated by central
    /// differences (one-sided at the boundary).
    pub fn log_grad(&self, x: &Point) -> Result<Point> {
        if !self.domain.contains(x, 1e-9 * self.domain.diameter()) {
            return Err(Error::OutsideDomain([x.x, x.y, x.z]));
        }
        let v = nearest_vertex(&self.domain, x);
        let rho = (x - v).norm();
        if rho == 0.0 {
            return Err(Error::NonpositiveWeight { value: 0.0 });
        }
        let mut g =
            (x - v) * (rho_smooth_derivative(rho, self.s0) / (rho * rho_smooth(rho, self.s0)));
        if self.mesh.is_some() {
            let f = |y: &Point| -> Result<f64> { Ok(rho_smooth(self.rho1(y)?, self.s1).ln()) };
            let fx = f(x)?;
            if !fx.is_finite() {
                return Err(Error::NonpositiveWeight { value: 0.0 });
            }
            let h = 1e-7 * self.domain.diameter();
            let inside = |y: &Point| self.domain.contains(y, 0.0);
            for k in 0..3 {
                let mut e = Point::zeros();
                e[k] = h;
                let (xp, xm) = (x + e, x - e);
                g[k] += match (inside(&xp), inside(&xm)) {
                    (true, true) => (f(&xp)? - f(&xm)?) / (2.0 * h),
                    (true, false) => (f(&xp)? - fx) / h,
                    (false, true) => (fx - f(&xm)?) / h,
                    (false, false) => return Err(Error::OutsideDomain([x.x, x.y, x.z])),
                };
            }
        }
        Ok(g)
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        if !self.domain.contains(x, 1e-9 * self.domain.diameter()) {
            return Err(Error::OutsideDomain([x.x, x.y, x.z]));
        }
        let r0 = self.rt0(x);
        if self.domain.dim() == 2 {
            return Ok(r0);
        }
        if r0 == 0.0 {
            return Ok(0.0);
        }
        Ok(r0 * rho_smooth(self.rho1(x)?, self.s1))
    }
}

fn nearest_vertex(p: &Polyhedron, x: &Point) -> Point {
    let mut best = (f64::INFINITY, Point::zeros());
    for v in p.vertices() {
        let d = (x - v).norm();
        if d < best.0 {
            best = (d, v);
        }
    }
    best.1
}

#[derive(Debug, Clone)]
enum Base {
    Eta,
    ROmega(Arc<ROmega>),
}

/// A scalar weight `base(x)^exponent` with `base` either `eta` or `r_omega`.
#[derive(Debug, Clone)]
pub struct WeightField {
    domain: Arc<Polyhedron>,
    base: Base,
    exponent: f64,
    bounds: Option<(f64, f64)>,
}

impl WeightField {
    pub fn eta(p: &Polyhedron) -> Self {
        WeightField {
            domain: Arc::new(p.clone()),
            base: Base::Eta,
            exponent: 1.0,
            bounds: None,
        }
    }

    pub fn r_omega(p: &Polyhedron, mesh: &SimplicialMesh) -> Result<Self> {
        let r = ROmega::new(p, mesh)?;
        Ok(WeightField {
            domain: Arc::new(p.clone()),
            base: Base::ROmega(Arc::new(r)),
            exponent: 1.0,
            bounds: None,
        })
    }

    /// `self^t`; powers compose multiplicatively.
    pub fn power(&self, t: f64) -> Self {
        WeightField {
            exponent: self.exponent * t,
            ..self.clone()
        }
    }

    pub fn kind(&self) -> &'static str {
        match (&self.base, self.exponent == 1.0) {
            (_, false) => "power",
            (Base::Eta, true) => "eta",
            (Base::ROmega(_), true) => "r_omega",
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    /// Smoothing scales `(s0, s1)` for `r_omega`-based fields.
    pub fn smoothing_scales(&self) -> Option<(f64, f64)> {
        match &self.base {
            Base::ROmega(r) => Some(r.scales()),
            Base::Eta => None,
        }
    }

    /// Certified `(c, C)` with `c <= r_omega/eta <= C`, once attached.
    pub fn equivalence_bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    pub fn with_bounds(mut self, bounds: (f64, f64)) -> Self {
        self.bounds = Some(bounds);
        self
    }

    /// Value of the base weight at `x` (no outside check for `eta`).
    fn base_value(&self, x: &Point) -> Result<f64> {
        match &self.base {
            Base::Eta => Ok(self.domain.distance_to_singular(x)),
            Base::ROmega(r) => r.eval(x),
        }
    }

    /// Logarithmic gradient `grad w / w = t grad(base) / base` at `x`.
    /// Errors on the singular set, where it is unbounded.
    pub fn log_grad(&self, x: &Point) -> Result<Point> {
        let g = match &self.base {
            Base::Eta => {
                let d = x - self.domain.nearest_singular_point(x);
                let e2 = d.norm_squared();
                if e2 == 0.0 {
                    return Err(Error::NonpositiveWeight { value: 0.0 });
                }
                d / e2
            }
            Base::ROmega(r) => r.log_grad(x)?,
        };
        Ok(g * self.exponent)
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        let b = self.base_value(x)?;
        Ok(if self.exponent == 0.0 {
            1.0
        } else if self.exponent == 1.0 {
            b
        } else {
            b.powf(self.exponent)
        })
    }
}

/// Sampled equivalence constants `(c, C)` of `r_omega / eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence {
    pub c: f64,
    pub big_c: f64,
    pub samples: usize,
}

/// `(min, max)` of `r_omega/eta` over the given points (points within 1e-8 of
/// the singular set or outside the open domain are skipped).
pub fn certify_equivalence_at(
    p: &Polyhedron,
    mesh: &SimplicialMesh,
    points: &[Point],
) -> Result<Equivalence> {
    let r = ROmega::new(p, mesh)?;
    let ratios: Vec<Result<f64>> = crate::numeric::par_map(points, |x| {
        let e = p.distance_to_singular(x);
        if e < 1e-8 || !p.contains_strict(x) {
            return Ok(f64::NAN);
        }
        Ok(r.eval(x)? / e)
    });
    let mut c = f64::INFINITY;
    let mut big_c: f64 = 0.0;
    let mut n = 0;
    for q in ratios {
        let q = q?;
        if q.is_nan() {
            continue;
        }
        n += 1;
        c = c.min(q);
        big_c = big_c.max(q);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no admissible sample point".into()));
    }
    if c <= 0.0 {
        return Err(Error::Certificate(
            "r_omega vanishes at an interior sample point".into(),
        ));
    }
    Ok(Equivalence {
        c,
        big_c,
        samples: n,
    })
}

/// Quasi-random (Halton) interior points, rejection-sampled from the bounding box.
pub fn interior_samples(p: &Polyhedron, count: usize) -> Vec<Point> {
    let (lo, hi) = p.bounding_box();
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let q = halton_point(i, p.dim());
        i += 1;
        let mut x = lo;
        for k in 0..p.dim() {
            x[k] += (hi[k] - lo[k]) * q[k];
        }
        if p.contains_strict(&x) && p.distance_to_singular(&x) >= 1e-8 {
            out.push(x);
        }
    }
    out
}

pub fn certify_equivalence(
    p: &Polyhedron,
    mesh: &SimplicialMesh,
    samples: usize,
) -> Result<Equivalence> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    certify_equivalence_at(p, mesh, &interior_samples(p, samples))
}
