use super::SimplicialMesh;
use crate::geometry::Point;

/// Uniform bucket grid over element bounding boxes for point location.
#[derive(Debug, Clone)]
pub struct ElementLocator {
    lo: Point,
    cell: Point,
    n: [usize; 3],
    buckets: Vec<Vec<usize>>,
}

impl ElementLocator {
    pub fn new(m: &SimplicialMesh) -> Self {
        let d = m.dim();
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for p in m.nodes() {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let ne = m.num_elements().max(1) as f64;
        let per_axis = ne.powf(1.0 / d as f64).ceil().max(1.0) as usize;
        let mut n = [1usize; 3];
        let mut cell = Point::repeat(1.0);
        for k in 0..d {
            n[k] = per_axis;
            let span = (hi[k] - lo[k]).max(1e-300);
            cell[k] = span / per_axis as f64;
        }
        let mut buckets = vec![Vec::new(); n[0] * n[1] * n[2]];
        let loc = ElementLocator {
            lo,
            cell,
            n,
            buckets: Vec::new(),
        };
        for e in 0..m.num_elements() {
            let pts = m.element_points(e);
            let mut a = Point::repeat(f64::INFINITY);
            let mut b = Point::repeat(f64::NEG_INFINITY);
            for p in &pts {
                a = a.inf(p);
                b = b.sup(p);
            }
            let (i0, i1) = (loc.index(&a), loc.index(&b));
            for i in i0[0]..=i1[0] {
                for j in i0[1]..=i1[1] {
                    for k in i0[2]..=i1[2] {
                        buckets[(i * n[1] + j) * n[2] + k].push(e);
                    }
                }
            }
        }
        ElementLocator { buckets, ..loc }
    }

    fn index(&self, x: &Point) -> [usize; 3] {
        let mut out = [0; 3];
        for k in 0..3 {
            let t = ((x[k] - self.lo[k]) / self.cell[k]).floor();
            out[k] = (t.max(0.0) as usize).min(self.n[k] - 1);
        }
        out
    }

    /// Element containing `x` (boundary points included within `tol` in
    /// barycentric coordinates) and the barycentric coordinates of `x`.
    pub fn locate(&self, m: &SimplicialMesh, x: &Point, tol: f64) -> Option<(usize, Vec<f64>)> {
        let idx = self.index(x);
        let bucket = &self.buckets[(idx[0] * self.n[1] + idx[1]) * self.n[2] + idx[2]];
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for &e in bucket {
            let lam = barycentric(&m.element_points(e), x);
            let worst = lam.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= -tol && best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((e, lam, worst));
            }
        }
        best.map(|(e, l, _)| (e, l))
    }
}

/// Barycentric coordinates of `x` in a triangle (xy-plane) or tetrahedron.
pub fn barycentric(pts: &[Point], x: &Point) -> Vec<f64> {
    if pts.len() == 3 {
        let (a, b, c) = (pts[0], pts[1], pts[2]);
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let l1 = ((x.x - a.x) * (c.y - a.y) - (c.x - a.x) * (x.y - a.y)) / det;
        let l2 = ((b.x - a.x) * (x.y - a.y) - (x.x - a.x) * (b.y - a.y)) / det;
        vec![1.0 - l1 - l2, l1, l2]
    } else {
        let j =
            nalgebra::Matrix3::from_columns(&[pts[1] - pts[0], pts[2] - pts[0], pts[3] - pts[0]]);
        let l = j
            .lu()
            .solve(&(x - pts[0]))
            .unwrap_or_else(|| Point::repeat(f64::NAN));
        vec![1.0 - l.x - l.y - l.z, l.x, l.y, l.z]
    }
}
