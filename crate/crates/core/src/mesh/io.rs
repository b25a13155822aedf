//! Mesh files.
//!
//! Native format (`.kmesh`), whitespace separated, 1-based indices:
//!
//! ```text
//! KLAB-MESH 1
//! DIM 2
//! NODES 4
//! 0 0 R
//! ...            one line per node: coordinates then I | R | S
//! ELEMENTS 2
//! 1 2 3
//! ...
//! BOUNDARY 4
//! 1 2 1
//! ...            facet nodes then the boundary-face tag
//! ```
//!
//! Coordinates are written with the shortest representation that parses
//! back to the same `f64`, so a write/read cycle is exact. Gmsh 2.2 ASCII
//! files holding only points, lines, triangles and tetrahedra can be imported.

use std::fs;
use std::path::Path;

use super::{NodeFlag, SimplicialMesh};
use crate::error::{Error, Result};
use crate::geometry::Point;

const MAGIC: &str = "KLAB-MESH";
const VERSION: u32 = 1;

pub fn write_mesh_string(m: &SimplicialMesh) -> String {
    use std::fmt::Write;
    let d = m.dim();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "DIM {d}");
    let _ = writeln!(s, "NODES {}", m.num_nodes());
    let coord_dim = if m.nodes().iter().any(|p| p.z != 0.0) {
        3
    } else {
        d
    };
    for (p, f) in m.nodes().iter().zip(m.flags()) {
        for k in 0..coord_dim {
            let _ = write!(s, "{:?} ", p[k]);
        }
        let _ = writeln!(s, "{}", f.code());
    }
    let _ = writeln!(s, "ELEMENTS {}", m.num_elements());
    for el in m.elements() {
        let line: Vec<String> = el.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    let (facets, tags) = m.raw_facets();
    let _ = writeln!(s, "BOUNDARY {}", tags.len());
    for (f, t) in facets.chunks(d).zip(tags) {
        let line: Vec<String> = f.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(s, "{} {}", line.join(" "), t + 1);
    }
    s
}

pub fn write_mesh(m: &SimplicialMesh, path: &Path) -> Result<()> {
    fs::write(path, write_mesh_string(m)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<SimplicialMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with("$MeshFormat") {
        parse_gmsh(&text, &path.display().to_string())
    } else {
        parse_mesh(&text, &path.display().to_string())
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a str,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            path,
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::MeshFile {
            path: self.path.into(),
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Next non-blank line, split into tokens.
    fn next(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Ok(t.split_whitespace().collect());
            }
        }
        Err(Error::MeshFile {
            path: self.path.into(),
            line: self.line + 1,
            msg: "unexpected end of file".into(),
        })
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let t = self.next()?;
        if t.len() != 2 || t[0] != key {
            return Err(self.err(format!("expected `{key} <count>`")));
        }
        t[1].parse()
            .map_err(|_| self.err(format!("bad {key} count `{}`", t[1])))
    }

    fn float(&self, s: &str) -> Result<f64> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(format!("bad coordinate `{s}`"))),
        }
    }

    fn index(&self, s: &str, n: usize) -> Result<usize> {
        let i: usize = s
            .parse()
            .map_err(|_| self.err(format!("bad index `{s}`")))?;
        if i == 0 || i > n {
            return Err(self.err(format!("dangling node index {i} (mesh has {n} nodes)")));
        }
        Ok(i - 1)
    }
}

pub fn parse_mesh(text: &str, path: &str) -> Result<SimplicialMesh> {
    let mut r = Lines::new(text, path);
    let magic = r.next()?;
    if magic.len() != 2 || magic[0] != MAGIC || magic[1] != VERSION.to_string() {
        return Err(r.err(format!("malformed header: expected `{MAGIC} {VERSION}`")));
    }
    let dim = r.header("DIM")?;
    if !(2..=3).contains(&dim) {
        return Err(r.err(format!("unsupported dimension {dim}")));
    }
    let nn = r.header("NODES")?;
    let mut nodes = Vec::with_capacity(nn);
    let mut flags = Vec::with_capacity(nn);
    for _ in 0..nn {
        let t = r.next()?;
        if t.len() != dim + 1 && t.len() != 4 {
            return Err(r.err("node line needs coordinates and a flag"));
        }
        let mut p = Point::zeros();
        for k in 0..t.len() - 1 {
            p[k] = r.float(t[k])?;
        }
        let f = NodeFlag::from_code(t[t.len() - 1])
            .ok_or_else(|| r.err(format!("bad node flag `{}`", t[t.len() - 1])))?;
        nodes.push(p);
        flags.push(f);
    }
    let ne = r.header("ELEMENTS")?;
    if ne == 0 {
        return Err(r.err("no elements"));
    }
    let mut elements = Vec::with_capacity(ne * (dim + 1));
    for _ in 0..ne {
        let t = r.next()?;
        if t.len() != dim + 1 {
            return Err(r.err(format!("element line needs {} indices", dim + 1)));
        }
        for s in t {
            elements.push(r.index(s, nn)?);
        }
    }
    let nb = r.header("BOUNDARY")?;
    let mut facets = Vec::with_capacity(nb * dim);
    let mut tags = Vec::with_capacity(nb);
    for _ in 0..nb {
        let t = r.next()?;
        if t.len() != dim + 1 {
            return Err(r.err(format!("boundary line needs {dim} indices and a tag")));
        }
        for s in &t[..dim] {
            facets.push(r.index(s, nn)?);
        }
        let tag: usize = t[dim]
            .parse()
            .map_err(|_| r.err(format!("bad tag `{}`", t[dim])))?;
        if tag == 0 {
            return Err(r.err("boundary tags are 1-based"));
        }
        tags.push(tag - 1);
    }
    if let Ok(extra) = r.next() {
        return Err(r.err(format!("trailing content `{}`", extra.join(" "))));
    }

    // Validate connectivity by rebuilding, then check the stored facets match.
    let check = SimplicialMesh::new(dim, nodes.clone(), elements.clone())?;
    if check.raw_elements() != elements.as_slice() {
        return Err(Error::Mesh("element orientation is not positive".into()));
    }
    let key = |f: &[usize]| {
        let mut k = f.to_vec();
        k.sort_unstable();
        k
    };
    let mut want: Vec<Vec<usize>> = check.raw_facets().0.chunks(dim).map(key).collect();
    let mut got: Vec<Vec<usize>> = facets.chunks(dim).map(key).collect();
    want.sort();
    got.sort();
    if want != got {
        return Err(Error::Mesh(
            "BOUNDARY section does not match the boundary of the elements".into(),
        ));
    }
    for (i, f) in flags.iter().enumerate() {
        if f.is_boundary() != check.is_boundary_node(i) {
            return Err(Error::Mesh(format!(
                "node {} flag disagrees with the connectivity",
                i + 1
            )));
        }
    }
    Ok(SimplicialMesh::from_parts(
        dim, nodes, elements, facets, tags, flags,
    ))
}

/// Gmsh 2.2 ASCII import. Only element types 15 (point), 1 (line),
/// 2 (triangle) and 4 (tetrahedron) are accepted; the highest-dimensional
/// simplices become elements and lower-dimensional entries are ignored.
/// Boundary tags and singular flags come from [`SimplicialMesh::attach_domain`].
pub fn parse_gmsh(text: &str, path: &str) -> Result<SimplicialMesh> {
    let mut r = Lines::new(text, path);
    let expect = |r: &mut Lines, key: &str| -> Result<()> {
        let t = r.next()?;
        if t != [key] {
            return Err(r.err(format!("expected `{key}`")));
        }
        Ok(())
    };
    expect(&mut r, "$MeshFormat")?;
    let fmt = r.next()?;
    if fmt.len() < 2 || !fmt[0].starts_with("2.") || fmt[1] != "0" {
        return Err(r.err("only ASCII Gmsh format 2.x is supported"));
    }
    expect(&mut r, "$EndMeshFormat")?;
    expect(&mut r, "$Nodes")?;
    let nn: usize = r
        .next()?
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| r.err("bad node count"))?;
    let mut ids = std::collections::BTreeMap::new();
    let mut nodes = Vec::with_capacity(nn);
    for i in 0..nn {
        let t = r.next()?;
        if t.len() != 4 {
            return Err(r.err("node line needs id x y z"));
        }
        let id: usize = t[0].parse().map_err(|_| r.err("bad node id"))?;
        ids.insert(id, i);
        nodes.push(Point::new(r.float(t[1])?, r.float(t[2])?, r.float(t[3])?));
    }
    expect(&mut r, "$EndNodes")?;
    expect(&mut r, "$Elements")?;
    let ne: usize = r
        .next()?
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| r.err("bad element count"))?;
    let mut by_dim: [Vec<usize>; 4] = Default::default();
    for _ in 0..ne {
        let t = r.next()?;
        let nums: Vec<usize> = t
            .iter()
            .map(|s| s.parse().map_err(|_| r.err("bad integer")))
            .collect::<Result<_>>()?;
        if nums.len() < 3 {
            return Err(r.err("short element line"));
        }
        let (ty, ntags) = (nums[1], nums[2]);
        let (d, nv) = match ty {
            15 => (0, 1),
            1 => (1, 2),
            2 => (2, 3),
            4 => (3, 4),
            other => {
                return Err(r.err(format!(
                    "unsupported element type {other} (linear simplices only)"
                )))
            }
        };
        if nums.len() != 3 + ntags + nv {
            return Err(r.err("element line length does not match its type"));
        }
        for &id in &nums[3 + ntags..] {
            let i = *ids
                .get(&id)
                .ok_or_else(|| r.err(format!("dangling node index {id}")))?;
            by_dim[d].push(i);
        }
    }
    expect(&mut r, "$EndElements")?;
    let is_3d = !by_dim[3].is_empty();
    if by_dim[2].is_empty() && !is_3d {
        return Err(r.err("no elements"));
    }
    if is_3d {
        SimplicialMesh::new(3, nodes, std::mem::take(&mut by_dim[3]))
    } else {
        if nodes.iter().any(|p| p.z != 0.0) {
            return Err(r.err("planar mesh has nonzero z coordinates"));
        }
        SimplicialMesh::new(2, nodes, std::mem::take(&mut by_dim[2]))
    }
}
