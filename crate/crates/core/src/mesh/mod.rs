//! Conforming simplicial meshes of polyhedral domains.

mod generate;
pub mod io;
mod locate;
mod refine;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{GEOM_TOL, SINGULAR_NODE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{Point, Polyhedron};

pub use generate::{triangulate, triangulate_with_cap};
pub use locate::ElementLocator;
pub use refine::{grading_collar, refine, refine_uniform, GradingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeFlag {
    Interior,
    BoundaryRegular,
    BoundarySingular,
}

impl NodeFlag {
    pub fn is_boundary(self) -> bool {
        !matches!(self, NodeFlag::Interior)
    }

    pub(crate) fn code(self) -> char {
        match self {
            NodeFlag::Interior => 'I',
            NodeFlag::BoundaryRegular => 'R',
            NodeFlag::BoundarySingular => 'S',
        }
    }

    pub(crate) fn from_code(c: &str) -> Option<Self> {
        match c {
            "I" => Some(NodeFlag::Interior),
            "R" => Some(NodeFlag::BoundaryRegular),
            "S" => Some(NodeFlag::BoundarySingular),
            _ => None,
        }
    }
}

/// A mesh of `dim`-simplices with nodes stored in 3D coordinates.
///
/// `dim` is the topological dimension; surface meshes (triangles on the unit
/// sphere) use `dim = 2` with genuinely 3D coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    nodes: Vec<Point>,
    elements: Vec<usize>,
    facets: Vec<usize>,
    facet_tags: Vec<usize>,
    flags: Vec<NodeFlag>,
}

/// Signed volume of a simplex embedded in R^dim (dim = 2 uses the xy-plane).
pub fn signed_volume(pts: &[Point]) -> f64 {
    match pts.len() {
        3 => {
            let a = pts[1] - pts[0];
            let b = pts[2] - pts[0];
            0.5 * (a.x * b.y - a.y * b.x)
        }
        4 => {
            let a = pts[1] - pts[0];
            let b = pts[2] - pts[0];
            let c = pts[3] - pts[0];
            a.dot(&b.cross(&c)) / 6.0
        }
        _ => 0.0,
    }
}

/// Unsigned measure of a simplex of any dimension <= 3 embedded in R^3.
pub fn simplex_measure(pts: &[Point]) -> f64 {
    match pts.len() {
        1 => 1.0,
        2 => (pts[1] - pts[0]).norm(),
        3 => 0.5 * (pts[1] - pts[0]).cross(&(pts[2] - pts[0])).norm(),
        4 => signed_volume(pts).abs(),
        _ => 0.0,
    }
}

impl SimplicialMesh {
    /// Builds a mesh from raw connectivity, flipping negatively oriented
    /// elements. Boundary facets are extracted but untagged (tag 0) and flags
    /// are interior/boundary only; call [`Self::attach_domain`] to tag them.
    pub fn new(dim: usize, nodes: Vec<Point>, elements: Vec<usize>) -> Result<Self> {
        Self::build(dim, nodes, elements, true)
    }

    /// Surface mesh (triangles in 3D); orientation is not touched.
    pub fn surface(nodes: Vec<Point>, elements: Vec<usize>) -> Result<Self> {
        Self::build(2, nodes, elements, false)
    }

    fn build(
        dim: usize,
        nodes: Vec<Point>,
        mut elements: Vec<usize>,
        orient: bool,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Mesh(format!("unsupported dimension {dim}")));
        }
        let k = dim + 1;
        if elements.is_empty() {
            return Err(Error::Mesh("no elements".into()));
        }
        if elements.len() % k != 0 {
            return Err(Error::Mesh(
                "element array length is not a multiple of dim+1".into(),
            ));
        }
        if let Some(&bad) = elements.iter().find(|&&i| i >= nodes.len()) {
            return Err(Error::Mesh(format!(
                "dangling node index {bad} (mesh has {} nodes)",
                nodes.len()
            )));
        }
        for el in elements.chunks_mut(k) {
            let pts: Vec<Point> = el.iter().map(|&i| nodes[i]).collect();
            let vol = if orient {
                signed_volume(&pts)
            } else {
                simplex_measure(&pts)
            };
            if vol.abs() <= GEOM_TOL * GEOM_TOL {
                return Err(Error::Mesh(format!("degenerate element {el:?}")));
            }
            if vol < 0.0 {
                el.swap(k - 2, k - 1);
            }
        }
        let mut mesh = SimplicialMesh {
            dim,
            flags: vec![NodeFlag::Interior; nodes.len()],
            nodes,
            elements,
            facets: Vec::new(),
            facet_tags: Vec::new(),
        };
        let facets = mesh.extract_boundary_facets()?;
        for f in facets.chunks(dim) {
            for &n in f {
                mesh.flags[n] = NodeFlag::BoundaryRegular;
            }
        }
        mesh.facet_tags = vec![0; facets.len() / dim];
        mesh.facets = facets;
        Ok(mesh)
    }

    /// Boundary facets are facets owned by exactly one element; a facet shared
    /// by more than two elements means non-conforming connectivity.
    fn extract_boundary_facets(&self) -> Result<Vec<usize>> {
        let d = self.dim;
        let mut count: BTreeMap<Vec<usize>, (usize, Vec<usize>)> = BTreeMap::new();
        for el in self.elements.chunks(d + 1) {
            for skip in 0..=d {
                // Facet opposite to local vertex `skip`, oriented outward for 2D.
                let mut f: Vec<usize> = (0..=d).filter(|&i| i != skip).map(|i| el[i]).collect();
                if d == 2 && skip == 1 {
                    f.swap(0, 1);
                }
                let mut key = f.clone();
                key.sort_unstable();
                let e = count.entry(key).or_insert((0, f));
                e.0 += 1;
            }
        }
        let mut out = Vec::new();
        for (key, (c, f)) in count {
            if c > 2 {
                return Err(Error::Mesh(format!(
                    "non-conforming connectivity: facet {key:?} shared by {c} elements"
                )));
            }
            if c == 1 {
                out.extend(f);
            }
        }
        Ok(out)
    }

    /// Tags boundary facets with the domain face containing them and flags nodes.
    pub fn attach_domain(&mut self, domain: &Polyhedron) -> Result<()> {
        if domain.dim() != self.dim {
            return Err(Error::Mesh(format!(
                "mesh dim {} vs domain dim {}",
                self.dim,
                domain.dim()
            )));
        }
        let scale = domain.diameter();
        let tol = 1e-9 * scale;
        let d = self.dim;
        let mut tags = Vec::with_capacity(self.facets.len() / d);
        for f in self.facets.chunks(d) {
            let c = f.iter().map(|&i| self.nodes[i]).sum::<Point>() / d as f64;
            let tag = domain.face_containing(&c, tol).ok_or_else(|| {
                Error::Mesh(format!("boundary facet {f:?} lies on no domain face"))
            })?;
            tags.push(tag);
        }
        self.facet_tags = tags;
        let mut flags = vec![NodeFlag::Interior; self.nodes.len()];
        for f in self.facets.chunks(d) {
            for &n in f {
                flags[n] = NodeFlag::BoundaryRegular;
            }
        }
        for (i, fl) in flags.iter_mut().enumerate() {
            if domain.distance_to_singular(&self.nodes[i]) < SINGULAR_NODE_TOL * scale.max(1.0) {
                if *fl == NodeFlag::Interior {
                    return Err(Error::Mesh(format!(
                        "interior node {i} lies on the singular set"
                    )));
                }
                *fl = NodeFlag::BoundarySingular;
            }
        }
        self.flags = flags;
        Ok(())
    }

    pub(crate) fn from_parts(
        dim: usize,
        nodes: Vec<Point>,
        elements: Vec<usize>,
        facets: Vec<usize>,
        facet_tags: Vec<usize>,
        flags: Vec<NodeFlag>,
    ) -> Self {
        SimplicialMesh {
            dim,
            nodes,
            elements,
            facets,
            facet_tags,
            flags,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    pub fn num_boundary_facets(&self) -> usize {
        self.facet_tags.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.elements.chunks(self.dim + 1)
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.element(e).iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn boundary_facet(&self, f: usize) -> &[usize] {
        &self.facets[f * self.dim..(f + 1) * self.dim]
    }

    pub fn facet_tag(&self, f: usize) -> usize {
        self.facet_tags[f]
    }

    pub fn flags(&self) -> &[NodeFlag] {
        &self.flags
    }

    pub fn is_boundary_node(&self, i: usize) -> bool {
        self.flags[i].is_boundary()
    }

    /// Indices of interior nodes, ascending.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.flags[i].is_boundary())
            .collect()
    }

    /// Indices of boundary nodes, ascending.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.flags[i].is_boundary())
            .collect()
    }

    pub fn singular_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.flags[i] == NodeFlag::BoundarySingular)
            .collect()
    }

    /// Elements having at least one node on the singular set.
    pub fn touches_singular(&self, e: usize) -> bool {
        self.element(e)
            .iter()
            .any(|&i| self.flags[i] == NodeFlag::BoundarySingular)
    }

    pub fn element_measure(&self, e: usize) -> f64 {
        simplex_measure(&self.element_points(e))
    }

    pub fn total_measure(&self) -> f64 {
        crate::numeric::sum((0..self.num_elements()).map(|e| self.element_measure(e)))
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        let p = self.element_points(e);
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                d = d.max((p[i] - p[j]).norm());
            }
        }
        d
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.element_diameter(e))
            .fold(0.0, f64::max)
    }

    pub fn min_diameter(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.element_diameter(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest interior angle (2D) or dihedral angle (3D) over all elements, radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for e in 0..self.num_elements() {
            let p = self.element_points(e);
            if self.dim == 2 {
                for i in 0..3 {
                    let a = p[(i + 1) % 3] - p[i];
                    let b = p[(i + 2) % 3] - p[i];
                    best = best.min((a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos());
                }
            } else {
                // dihedral angle along each of the six edges
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
                        let e_dir = (p[j] - p[i]).normalize();
                        let proj = |q: Point| {
                            let v = q - p[i];
                            v - e_dir * v.dot(&e_dir)
                        };
                        let u = proj(p[others[0]]);
                        let w = proj(p[others[1]]);
                        best =
                            best.min((u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos());
                    }
                }
            }
        }
        best
    }

    /// Node adjacency by mesh edges, each list sorted ascending.
    pub fn node_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for el in self.elements() {
            for &a in el {
                for &b in el {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Elements incident to each node.
    pub fn node_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (e, el) in self.elements().enumerate() {
            for &n in el {
                out[n].push(e);
            }
        }
        out
    }

    /// Unique mesh edges, sorted.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut set = std::collections::BTreeSet::new();
        for el in self.elements() {
            for i in 0..el.len() {
                for j in (i + 1)..el.len() {
                    set.insert([el[i].min(el[j]), el[i].max(el[j])]);
                }
            }
        }
        set.into_iter().collect()
    }

    pub(crate) fn set_nodes(&mut self, nodes: Vec<Point>) {
        self.nodes = nodes;
    }

    pub(crate) fn raw_elements(&self) -> &[usize] {
        &self.elements
    }

    pub(crate) fn raw_facets(&self) -> (&[usize], &[usize]) {
        (&self.facets, &self.facet_tags)
    }
}
