//! Straight polyhedral domains in 2D and 3D.
//!
//! A domain is stored through its vertices, its edges, and its boundary
//! faces (the closed pieces whose union is the boundary). The singular set
//! consists of all faces of dimension at most `n - 2`: the vertices of a
//! polygon, and the closed edges of a 3D polyhedron.

pub mod planar;
pub mod spherical;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::config::GEOM_TOL;
use crate::error::{Error, Result};
use planar::{
    closest_on_segment, point_segment_distance, segments_intersect, signed_area2, winding_number,
};
pub use spherical::SphericalPolygon;

/// Coordinates are always stored in 3D; planar domains use `z = 0`.
pub type Point = Vector3<f64>;

/// Canonical 3D shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    /// `[0,lx] x [0,ly] x [0,lz]`
    Box { lx: f64, ly: f64, lz: f64 },
    /// The planar L-shape scaled by `size`, extruded over `[0, height]`.
    LPrism { size: f64, height: f64 },
    /// `[-size,size]^3` with the open octant `(0,size)^3` removed.
    Fichera { size: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Polygon,
    Generated(Generator),
}

/// A boundary face `D_j`: a planar polygon (a segment in 2D) with outward unit normal.
#[derive(Debug, Clone, Serialize)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub normal: [f64; 3],
}

/// All faces of the closed domain, by dimension, with their incidences.
#[derive(Debug, Clone, Serialize)]
pub struct FaceLattice {
    /// `faces_by_dim[k][i]` lists the (sorted) vertex indices of the i-th k-face.
    pub faces_by_dim: Vec<Vec<Vec<usize>>>,
    /// `incidence[k][i]` lists the (k+1)-faces having k-face `i` on their boundary.
    pub incidence: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Polyhedron {
    dim: usize,
    shape: Shape,
    vertices: Vec<[f64; 3]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<Face>,
    edge_faces: Vec<[usize; 2]>,
    lattice: FaceLattice,
}

/// The planar L-shape with its reentrant corner at the origin.
pub fn l_shape_vertices(size: f64) -> Vec<[f64; 2]> {
    [
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0, 1.0],
        [-1.0, 1.0],
        [-1.0, -1.0],
        [0.0, -1.0],
    ]
    .iter()
    .map(|p| [p[0] * size, p[1] * size])
    .collect()
}

pub fn unit_square_vertices() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
}

fn pt(a: &[f64; 3]) -> Point {
    Point::new(a[0], a[1], a[2])
}

impl Polyhedron {
    /// Builds a simple polygon from a closed vertex cycle (either orientation).
    /// The cycle is stored counter-clockwise, starting at the first input vertex.
    pub fn polygon(cycle: &[[f64; 2]]) -> Result<Self> {
        let n = cycle.len();
        if n < 3 {
            return Err(Error::Geometry(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        let mut pts: Vec<Point> = cycle.iter().map(|p| Point::new(p[0], p[1], 0.0)).collect();
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let tol = GEOM_TOL * scale;
        for i in 0..n {
            for j in (i + 1)..n {
                if (pts[i] - pts[j]).norm() <= tol {
                    return Err(Error::Geometry(format!("repeated vertex {i} and {j}")));
                }
            }
        }
        let area2 = signed_area2(&pts);
        if area2.abs() <= tol * scale {
            return Err(Error::Geometry("degenerate polygon with zero area".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n]) {
                    return Err(Error::Geometry(format!(
                        "self-intersecting cycle: sides {i} and {j} meet"
                    )));
                }
            }
        }
        if area2 < 0.0 {
            pts[1..].reverse();
        }
        let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        let faces: Vec<Face> = edges
            .iter()
            .map(|&[a, b]| {
                let d = pts[b] - pts[a];
                let nrm = Point::new(d.y, -d.x, 0.0).normalize();
                Face {
                    vertices: vec![a, b],
                    normal: [nrm.x, nrm.y, 0.0],
                }
            })
            .collect();
        let poly = Polyhedron {
            dim: 2,
            shape: Shape::Polygon,
            vertices: pts.iter().map(|p| [p.x, p.y, 0.0]).collect(),
            edges: edges.clone(),
            faces,
            edge_faces: Vec::new(),
            lattice: FaceLattice {
                faces_by_dim: Vec::new(),
                incidence: Vec::new(),
            },
        };
        for v in 0..n {
            let ang = poly.interior_angle(v)?;
            if (ang - PI).abs() <= 1e-9 {
                return Err(Error::Geometry(format!(
                    "straight angle at vertex {v} (collinear sides)"
                )));
            }
            if ang <= 1e-9 || ang >= 2.0 * PI - 1e-9 {
                return Err(Error::Geometry(format!(
                    "self-overlapping sides at vertex {v}"
                )));
            }
        }
        let lattice = FaceLattice {
            faces_by_dim: vec![
                (0..n).map(|i| vec![i]).collect(),
                edges.iter().map(|e| sorted(e.to_vec())).collect(),
            ],
            incidence: vec![(0..n)
                .map(|v| vec![(v + n - 1) % n, v])
                .map(sorted)
                .collect()],
        };
        Ok(Polyhedron { lattice, ..poly })
    }

    pub fn unit_square() -> Self {
        Self::polygon(&unit_square_vertices()).expect("unit square is valid")
    }

    pub fn l_shape() -> Self {
        Self::polygon(&l_shape_vertices(1.0)).expect("L-shape is valid")
    }

    /// Builds one of the canonical 3D shapes.
    pub fn generate(gen: Generator) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Geometry(format!(
                    "nonpositive dimension {name} = {v}"
                )))
            }
        };
        let cycles: Vec<Vec<Point>> = match gen {
            Generator::Box { lx, ly, lz } => {
                positive("lx", lx)?;
                positive("ly", ly)?;
                positive("lz", lz)?;
                box_faces(lx, ly, lz)
            }
            Generator::LPrism { size, height } => {
                positive("size", size)?;
                positive("height", height)?;
                prism_faces(&l_shape_vertices(size), height)
            }
            Generator::Fichera { size } => {
                positive("size", size)?;
                fichera_faces(size)
            }
        };
        Self::from_face_cycles(Shape::Generated(gen), cycles)
    }

    pub fn unit_box() -> Self {
        Self::generate(Generator::Box {
            lx: 1.0,
            ly: 1.0,
            lz: 1.0,
        })
        .expect("unit box is valid")
    }

    fn from_face_cycles(shape: Shape, cycles: Vec<Vec<Point>>) -> Result<Self> {
        // Deterministic vertex numbering: lexicographic order of coordinates.
        let key = |p: &Point| {
            [
                (p.x * 1e9).round() as i64,
                (p.y * 1e9).round() as i64,
                (p.z * 1e9).round() as i64,
            ]
        };
        let mut pool: BTreeMap<[i64; 3], Point> = BTreeMap::new();
        for c in &cycles {
            for p in c {
                pool.entry(key(p)).or_insert(*p);
            }
        }
        let index: BTreeMap<[i64; 3], usize> =
            pool.keys().enumerate().map(|(i, k)| (*k, i)).collect();
        let vertices: Vec<[f64; 3]> = pool.values().map(|p| [p.x, p.y, p.z]).collect();

        let mut faces = Vec::with_capacity(cycles.len());
        for c in &cycles {
            let idx: Vec<usize> = c.iter().map(|p| index[&key(p)]).collect();
            faces.push(Face {
                vertices: idx,
                normal: [0.0; 3],
            });
        }
        let mut poly = Polyhedron {
            dim: 3,
            shape,
            vertices,
            edges: Vec::new(),
            faces,
            edge_faces: Vec::new(),
            lattice: FaceLattice {
                faces_by_dim: Vec::new(),
                incidence: Vec::new(),
            },
        };
        poly.orient_faces()?;

        let mut edge_map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (fi, f) in poly.faces.iter().enumerate() {
            let k = f.vertices.len();
            for i in 0..k {
                let a = f.vertices[i];
                let b = f.vertices[(i + 1) % k];
                edge_map.entry([a.min(b), a.max(b)]).or_default().push(fi);
            }
        }
        let mut edges = Vec::new();
        let mut edge_faces = Vec::new();
        for (e, fs) in &edge_map {
            if fs.len() != 2 {
                return Err(Error::Geometry(format!(
                    "edge {e:?} bounds {} faces",
                    fs.len()
                )));
            }
            edges.push(*e);
            edge_faces.push([fs[0], fs[1]]);
        }
        poly.edges = edges;
        poly.edge_faces = edge_faces;

        let nv = poly.vertices.len();
        let mut v_inc = vec![Vec::new(); nv];
        for (ei, e) in poly.edges.iter().enumerate() {
            v_inc[e[0]].push(ei);
            v_inc[e[1]].push(ei);
        }
        poly.lattice = FaceLattice {
            faces_by_dim: vec![
                (0..nv).map(|i| vec![i]).collect(),
                poly.edges.iter().map(|e| e.to_vec()).collect(),
                poly.faces
                    .iter()
                    .map(|f| sorted(f.vertices.clone()))
                    .collect(),
            ],
            incidence: vec![
                v_inc,
                poly.edge_faces.iter().map(|f| sorted(f.to_vec())).collect(),
            ],
        };
        for e in 0..poly.edges.len() {
            let ang = poly.dihedral_angle(e)?;
            if (ang - PI).abs() < 1e-9 {
                return Err(Error::Geometry(format!("edge {e} joins coplanar faces")));
            }
        }
        Ok(poly)
    }

    /// Fixes each face cycle so its Newell normal points out of the domain.
    fn orient_faces(&mut self) -> Result<()> {
        for fi in 0..self.faces.len() {
            let pts: Vec<Point> = self.faces[fi]
                .vertices
                .iter()
                .map(|&i| pt(&self.vertices[i]))
                .collect();
            let n = newell_normal(&pts);
            if n.norm() < GEOM_TOL {
                return Err(Error::Geometry(format!("face {fi} is degenerate")));
            }
            let n = n.normalize();
            let inner = face_interior_point(&pts, &n)
                .ok_or_else(|| Error::Geometry(format!("face {fi} has no interior point")))?;
            let probe = inner + n * 1e-7;
            let (n, flip) = if self.contains_strict(&probe) {
                (-n, true)
            } else {
                (n, false)
            };
            if flip {
                self.faces[fi].vertices.reverse();
            }
            self.faces[fi].normal = [n.x, n.y, n.z];
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn vertex(&self, i: usize) -> Point {
        pt(&self.vertices[i])
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.vertices.iter().map(pt).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Edges: polygon sides in 2D, polyhedron edges in 3D.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn lattice(&self) -> &FaceLattice {
        &self.lattice
    }

    /// Faces adjacent to each 3D edge (empty in 2D).
    pub fn edge_faces(&self) -> &[[usize; 2]] {
        &self.edge_faces
    }

    /// Singular edges (3D only; all edges).
    pub fn singular_edges(&self) -> &[[usize; 2]] {
        if self.dim == 3 {
            &self.edges
        } else {
            &[]
        }
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertex(a) - self.vertex(b)).norm()
    }

    pub fn min_edge_length(&self) -> f64 {
        (0..self.edges.len())
            .map(|e| self.edge_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn measure(&self) -> f64 {
        match self.shape {
            Shape::Polygon => signed_area2(&self.vertices()).abs() / 2.0,
            Shape::Generated(Generator::Box { lx, ly, lz }) => lx * ly * lz,
            Shape::Generated(Generator::LPrism { size, height }) => 3.0 * size * size * height,
            Shape::Generated(Generator::Fichera { size }) => 7.0 * size.powi(3),
        }
    }

    /// Interior angle at a polygon vertex, in (0, 2pi).
    pub fn interior_angle(&self, v: usize) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::InvalidArgument(
                "interior_angle is defined for polygons".into(),
            ));
        }
        let n = self.vertices.len();
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, len: n });
        }
        let prev = self.vertex((v + n - 1) % n);
        let cur = self.vertex(v);
        let next = self.vertex((v + 1) % n);
        let din = cur - prev;
        let dout = next - cur;
        let turn = planar::cross2(&din, &dout).atan2(din.dot(&dout));
        Ok(PI - turn)
    }

    /// Interior dihedral angle along a 3D edge, in (0, 2pi), from exact face normals.
    pub fn dihedral_angle(&self, e: usize) -> Result<f64> {
        if self.dim != 3 {
            return Err(Error::InvalidArgument(
                "dihedral_angle is defined for 3D polyhedra".into(),
            ));
        }
        if e >= self.edges.len() {
            return Err(Error::IndexOutOfRange {
                index: e,
                len: self.edges.len(),
            });
        }
        let [a, b] = self.edges[e];
        let dir = (self.vertex(b) - self.vertex(a)).normalize();
        let [f1, f2] = self.edge_faces[e];
        let n1 = pt(&self.faces[f1].normal);
        let n2 = pt(&self.faces[f2].normal);
        // In-face directions perpendicular to the edge, pointing into each face.
        let t1 = dir.cross(&n1);
        let t1 = if self.points_into_face(f1, a, b, &t1) {
            t1
        } else {
            -t1
        };
        let t2 = dir.cross(&n2);
        let t2 = if self.points_into_face(f2, a, b, &t2) {
            t2
        } else {
            -t2
        };
        let phi = t1.dot(&t2).clamp(-1.0, 1.0).acos();
        Ok(if n1.dot(&t2) < 0.0 {
            phi
        } else {
            2.0 * PI - phi
        })
    }

    fn points_into_face(&self, f: usize, a: usize, b: usize, t: &Point) -> bool {
        let mid = (self.vertex(a) + self.vertex(b)) * 0.5;
        let scale = self.min_edge_length();
        let probe = mid + t * (1e-6 * scale);
        self.face_distance(f, &probe) < 1e-9 * scale
    }

    /// Interior angle at a singular vertex (2D) or along an edge (3D), as used
    /// by the sector constants.
    pub fn opening_angle(&self, index: usize) -> Result<f64> {
        if self.dim == 2 {
            self.interior_angle(index)
        } else {
            self.dihedral_angle(index)
        }
    }

    /// Distance to the vertices only.
    pub fn distance_to_vertices(&self, x: &Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| (x - pt(v)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance to the singular set.
    pub fn distance_to_singular(&self, x: &Point) -> f64 {
        if self.dim == 2 {
            self.distance_to_vertices(x)
        } else {
            self.edges
                .iter()
                .map(|&[a, b]| point_segment_distance(x, &self.vertex(a), &self.vertex(b)))
                .fold(f64::INFINITY, f64::min)
        }
    }

    /// Nearest point of the singular set (ties resolved by lowest index).
    pub fn nearest_singular_point(&self, x: &Point) -> Point {
        if self.dim == 2 {
            let mut best = (f64::INFINITY, Point::zeros());
            for v in self.vertices() {
                let d = (x - v).norm();
                if d < best.0 {
                    best = (d, v);
                }
            }
            best.1
        } else {
            let mut best = (f64::INFINITY, Point::zeros());
            for &[a, b] in &self.edges {
                let c = closest_on_segment(x, &self.vertex(a), &self.vertex(b));
                let d = (x - c).norm();
                if d < best.0 {
                    best = (d, c);
                }
            }
            best.1
        }
    }

    /// Distance from `x` to the closed boundary face `f`.
    pub fn face_distance(&self, f: usize, x: &Point) -> f64 {
        let face = &self.faces[f];
        if self.dim == 2 {
            let [a, b] = [face.vertices[0], face.vertices[1]];
            return point_segment_distance(x, &self.vertex(a), &self.vertex(b));
        }
        let n = pt(&face.normal);
        let p0 = self.vertex(face.vertices[0]);
        let h = (x - p0).dot(&n);
        let proj = x - n * h;
        let pts: Vec<Point> = face.vertices.iter().map(|&i| self.vertex(i)).collect();
        let (u, v) = plane_basis(&n);
        let flat: Vec<Point> = pts
            .iter()
            .map(|p| Point::new((p - p0).dot(&u), (p - p0).dot(&v), 0.0))
            .collect();
        let q = Point::new((proj - p0).dot(&u), (proj - p0).dot(&v), 0.0);
        if winding_number(&flat, &q) != 0 {
            h.abs()
        } else {
            let k = pts.len();
            let inplane = (0..k)
                .map(|i| point_segment_distance(&proj, &pts[i], &pts[(i + 1) % k]))
                .fold(f64::INFINITY, f64::min);
            (inplane * inplane + h * h).sqrt()
        }
    }

    pub fn boundary_distance(&self, x: &Point) -> f64 {
        (0..self.faces.len())
            .map(|f| self.face_distance(f, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the boundary face containing `x` (within `tol`), lowest index first.
    pub fn face_containing(&self, x: &Point, tol: f64) -> Option<usize> {
        (0..self.faces.len()).find(|&f| self.face_distance(f, x) <= tol)
    }

    /// Strict interior membership.
    pub fn contains_strict(&self, x: &Point) -> bool {
        match self.shape {
            Shape::Polygon => {
                let pts = self.vertices();
                winding_number(&pts, x) != 0 && planar::boundary_distance(&pts, x) > 0.0
            }
            Shape::Generated(Generator::Box { lx, ly, lz }) => {
                x.x > 0.0 && x.x < lx && x.y > 0.0 && x.y < ly && x.z > 0.0 && x.z < lz
            }
            Shape::Generated(Generator::LPrism { size, height }) => {
                let l: Vec<Point> = l_shape_vertices(size)
                    .iter()
                    .map(|p| Point::new(p[0], p[1], 0.0))
                    .collect();
                let q = Point::new(x.x, x.y, 0.0);
                x.z > 0.0
                    && x.z < height
                    && winding_number(&l, &q) != 0
                    && planar::boundary_distance(&l, &q) > 0.0
            }
            Shape::Generated(Generator::Fichera { size }) => {
                let in_cube = x.iter().all(|c| c.abs() < size);
                let in_octant = x.iter().all(|&c| c >= 0.0);
                in_cube && !in_octant
            }
        }
    }

    /// Membership in the closed domain, with tolerance `tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.contains_strict(x) || self.boundary_distance(x) <= tol
    }

    /// Diameter of the vertex set.
    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for a in &v {
            for b in &v {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Componentwise bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in self.vertices() {
            lo = lo.inf(&v);
            hi = hi.sup(&v);
        }
        (lo, hi)
    }

    /// The spherical polygon cut out of the unit sphere by the domain near vertex `v`.
    pub fn vertex_link(&self, v: usize) -> Result<SphericalPolygon> {
        if self.dim != 3 {
            return Err(Error::InvalidArgument(
                "vertex links are defined for 3D polyhedra".into(),
            ));
        }
        if v >= self.vertices.len() {
            return Err(Error::IndexOutOfRange {
                index: v,
                len: self.vertices.len(),
            });
        }
        let apex = self.vertex(v);
        let incident: Vec<usize> = (0..self.edges.len())
            .filter(|&e| self.edges[e].contains(&v))
            .collect();
        if incident.len() < 3 {
            return Err(Error::Geometry(format!(
                "vertex {v} has {} incident edges",
                incident.len()
            )));
        }
        // Walk the incident edges in cyclic order through shared faces.
        let mut order = vec![incident[0]];
        let mut prev_face = usize::MAX;
        loop {
            let cur = *order.last().unwrap();
            let [f1, f2] = self.edge_faces[cur];
            let f = if f1 != prev_face { f1 } else { f2 };
            let next = incident
                .iter()
                .copied()
                .find(|&e| e != cur && self.edge_faces[e].contains(&f))
                .ok_or_else(|| Error::Geometry(format!("broken face cycle around vertex {v}")))?;
            prev_face = f;
            if next == order[0] {
                break;
            }
            if order.contains(&next) || order.len() > incident.len() {
                return Err(Error::Geometry(format!(
                    "vertex {v} has a non-manifold link"
                )));
            }
            order.push(next);
        }
        if order.len() != incident.len() {
            return Err(Error::Geometry(format!(
                "vertex {v} has a disconnected link"
            )));
        }
        let corners: Vec<Point> = order
            .iter()
            .map(|&e| {
                let [a, b] = self.edges[e];
                let other = if a == v { b } else { a };
                (self.vertex(other) - apex).normalize()
            })
            .collect();
        let angles: Vec<f64> = order
            .iter()
            .map(|&e| self.dihedral_angle(e))
            .collect::<Result<_>>()?;

        // Canonical shapes are axis-aligned: the link is a union of octants.
        let h = 1e-6 * self.min_edge_length();
        let mut triangles = Vec::new();
        for i in 0..8 {
            let s = [
                if i & 1 == 0 { 1.0 } else { -1.0 },
                if i & 2 == 0 { 1.0 } else { -1.0 },
                if i & 4 == 0 { 1.0 } else { -1.0 },
            ];
            let probe = apex + Point::new(s[0], s[1], s[2]) * h;
            if self.contains_strict(&probe) {
                triangles.push([
                    Point::new(s[0], 0.0, 0.0),
                    Point::new(0.0, s[1], 0.0),
                    Point::new(0.0, 0.0, s[2]),
                ]);
            }
        }
        let link = SphericalPolygon::new(corners, angles, triangles)?;
        if (link.area() - link.triangulated_area()).abs() > 1e-9 {
            return Err(Error::Geometry(format!(
                "vertex {v}: link is not a union of octants (area {} vs {})",
                link.area(),
                link.triangulated_area()
            )));
        }
        Ok(link)
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn newell_normal(pts: &[Point]) -> Point {
    let k = pts.len();
    let mut n = Point::zeros();
    for i in 0..k {
        let a = pts[i];
        let b = pts[(i + 1) % k];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

fn plane_basis(n: &Point) -> (Point, Point) {
    let a = if n.x.abs() < 0.9 {
        Point::x()
    } else {
        Point::y()
    };
    let u = n.cross(&a).normalize();
    let v = n.cross(&u);
    (u, v)
}

fn face_interior_point(pts: &[Point], n: &Point) -> Option<Point> {
    let (u, v) = plane_basis(n);
    let p0 = pts[0];
    let flat: Vec<Point> = pts
        .iter()
        .map(|p| Point::new((p - p0).dot(&u), (p - p0).dot(&v), 0.0))
        .collect();
    let k = pts.len();
    for i in 0..k {
        let c = (pts[(i + k - 1) % k] + pts[i] + pts[(i + 1) % k]) / 3.0;
        let q = Point::new((c - p0).dot(&u), (c - p0).dot(&v), 0.0);
        if winding_number(&flat, &q) != 0 && planar::boundary_distance(&flat, &q) > 1e-9 {
            return Some(c);
        }
    }
    None
}

fn rect(origin: Point, du: Point, dv: Point) -> Vec<Point> {
    vec![origin, origin + du, origin + du + dv, origin + dv]
}

fn box_faces(lx: f64, ly: f64, lz: f64) -> Vec<Vec<Point>> {
    let o = Point::zeros();
    let ex = Point::new(lx, 0.0, 0.0);
    let ey = Point::new(0.0, ly, 0.0);
    let ez = Point::new(0.0, 0.0, lz);
    vec![
        rect(o, ey, ez),
        rect(ex, ey, ez),
        rect(o, ex, ez),
        rect(ey, ex, ez),
        rect(o, ex, ey),
        rect(ez, ex, ey),
    ]
}

fn prism_faces(base: &[[f64; 2]], height: f64) -> Vec<Vec<Point>> {
    let n = base.len();
    let bottom: Vec<Point> = base.iter().map(|p| Point::new(p[0], p[1], 0.0)).collect();
    let top: Vec<Point> = base
        .iter()
        .map(|p| Point::new(p[0], p[1], height))
        .collect();
    let mut faces = vec![bottom.clone(), top.clone()];
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push(vec![bottom[i], bottom[j], top[j], top[i]]);
    }
    faces
}

fn fichera_faces(s: f64) -> Vec<Vec<Point>> {
    // Outer L-shaped faces on the planes x_k = +s, full squares on x_k = -s,
    // and three inner squares bounding the removed octant.
    let l: [[f64; 2]; 6] = [[-s, -s], [s, -s], [s, 0.0], [0.0, 0.0], [0.0, s], [-s, s]];
    let sq: [[f64; 2]; 4] = [[-s, -s], [s, -s], [s, s], [-s, s]];
    let inner: [[f64; 2]; 4] = [[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]];
    // Embed (u, v) on the plane x_axis = c, with (u, v) along the next two axes.
    let embed = |axis: usize, c: f64, uv: &[[f64; 2]]| -> Vec<Point> {
        uv.iter()
            .map(|p| {
                let mut q = [0.0; 3];
                q[axis] = c;
                q[(axis + 1) % 3] = p[0];
                q[(axis + 2) % 3] = p[1];
                Point::new(q[0], q[1], q[2])
            })
            .collect()
    };
    let mut faces = Vec::new();
    for axis in 0..3 {
        faces.push(embed(axis, -s, &sq));
        faces.push(embed(axis, s, &l));
        faces.push(embed(axis, 0.0, &inner));
    }
    faces
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_four_singular_vertices_with_right_angles() {
        let sq = Polyhedron::unit_square();
        assert_eq!(sq.num_vertices(), 4);
        for v in 0..4 {
            assert!((sq.interior_angle(v).unwrap() - PI / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn l_shape_reentrant_angle() {
        let l = Polyhedron::l_shape();
        assert_eq!(l.num_vertices(), 6);
        assert!((l.interior_angle(0).unwrap() - 1.5 * PI).abs() < 1e-14);
        let sum: f64 = (0..6).map(|v| l.interior_angle(v).unwrap()).sum();
        assert!((sum - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let mut cw = unit_square_vertices();
        cw.reverse();
        let p = Polyhedron::polygon(&cw).unwrap();
        assert_eq!(p.vertex(0), Point::new(0.0, 1.0, 0.0));
        assert!((p.interior_angle(0).unwrap() - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_polygons_are_rejected() {
        let bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Polyhedron::polygon(&bowtie),
            Err(Error::Geometry(_))
        ));
        let repeated = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Polyhedron::polygon(&repeated),
            Err(Error::Geometry(_))
        ));
        let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            Polyhedron::polygon(&flat),
            Err(Error::Geometry(_))
        ));
        let two = [[0.0, 0.0], [1.0, 0.0]];
        assert!(Polyhedron::polygon(&two).is_err());
    }

    #[test]
    fn index_errors() {
        let sq = Polyhedron::unit_square();
        assert!(matches!(
            sq.interior_angle(4),
            Err(Error::IndexOutOfRange { .. })
        ));
        let b = Polyhedron::unit_box();
        assert!(matches!(
            b.dihedral_angle(12),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            b.vertex_link(8),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn box_combinatorics_and_angles() {
        let b = Polyhedron::unit_box();
        assert_eq!(
            (b.num_vertices(), b.edges().len(), b.faces().len()),
            (8, 12, 6)
        );
        for e in 0..12 {
            assert!((b.dihedral_angle(e).unwrap() - PI / 2.0).abs() < 1e-12);
        }
        let link = b.vertex_link(0).unwrap();
        assert!((link.area() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_dimensions_rejected() {
        let r = Polyhedron::generate(Generator::Box {
            lx: 1.0,
            ly: 0.0,
            lz: 1.0,
        });
        assert!(matches!(r, Err(Error::Geometry(_))));
        assert!(Polyhedron::generate(Generator::Fichera { size: -1.0 }).is_err());
    }

    #[test]
    fn outward_normals_point_outside() {
        for g in [
            Generator::Box {
                lx: 1.0,
                ly: 2.0,
                lz: 0.5,
            },
            Generator::LPrism {
                size: 1.0,
                height: 1.0,
            },
            Generator::Fichera { size: 1.0 },
        ] {
            let p = Polyhedron::generate(g).unwrap();
            for f in p.faces() {
                let pts: Vec<Point> = f.vertices.iter().map(|&i| p.vertex(i)).collect();
                let n = pt(&f.normal);
                let c = face_interior_point(&pts, &n).unwrap();
                assert!(!p.contains_strict(&(c + n * 1e-6)));
                assert!(p.contains_strict(&(c - n * 1e-6)));
            }
        }
    }

    #[test]
    fn lattice_incidence_is_symmetric() {
        let p = Polyhedron::generate(Generator::Fichera { size: 1.0 }).unwrap();
        let lat = p.lattice();
        for k in 0..lat.incidence.len() {
            for (i, ups) in lat.incidence[k].iter().enumerate() {
                for &j in ups {
                    let lower = &lat.faces_by_dim[k][i];
                    let upper = &lat.faces_by_dim[k + 1][j];
                    assert!(lower.iter().all(|v| upper.contains(v)));
                }
            }
        }
    }
}
