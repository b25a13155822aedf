use std::collections::BTreeMap;

use super::{refine_uniform, SimplicialMesh};
use crate::config::DEFAULT_NODE_CAP;
use crate::error::{Error, Result};
use crate::geometry::planar::{cross2, winding_number};
use crate::geometry::{Point, Polyhedron, Shape};

/// Meshes the domain with elements of diameter at most `sqrt(dim) * h`.
///
/// Axis-aligned domains (rectilinear polygons and every 3D generator) get a
/// structured tensor grid whose lines pass through all vertex coordinates,
/// split into two triangles per cell (2D) or six Kuhn tetrahedra per cell
/// (3D). Other polygons are ear-clipped and uniformly refined.
pub fn triangulate(domain: &Polyhedron, h: f64) -> Result<SimplicialMesh> {
    triangulate_with_cap(domain, h, DEFAULT_NODE_CAP)
}

pub fn triangulate_with_cap(
    domain: &Polyhedron,
    h: f64,
    node_cap: usize,
) -> Result<SimplicialMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target size h must be positive, got {h}"
        )));
    }
    let mut mesh = if is_axis_aligned(domain) {
        tensor_grid(domain, h, node_cap)?
    } else {
        ear_clipped(domain, h, node_cap)?
    };
    mesh.attach_domain(domain)?;
    Ok(mesh)
}

fn is_axis_aligned(domain: &Polyhedron) -> bool {
    match domain.shape() {
        Shape::Generated(_) => true,
        Shape::Polygon => domain.edges().iter().all(|&[a, b]| {
            let d = domain.vertex(b) - domain.vertex(a);
            d.x.abs() < 1e-14 || d.y.abs() < 1e-14
        }),
    }
}

fn axis_lines(values: impl Iterator<Item = f64>, h: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut out = vec![v[0]];
    for w in v.windows(2) {
        let gap = w[1] - w[0];
        let n = ((gap / h) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(if k == n {
                w[1]
            } else {
                w[0] + gap * k as f64 / n as f64
            });
        }
    }
    out
}

fn tensor_grid(domain: &Polyhedron, h: f64, node_cap: usize) -> Result<SimplicialMesh> {
    let dim = domain.dim();
    let verts = domain.vertices();
    let lines: Vec<Vec<f64>> = (0..dim)
        .map(|k| axis_lines(verts.iter().map(|p| p[k]), h))
        .collect();
    let counts: Vec<usize> = lines.iter().map(|l| l.len()).collect();
    let total: usize = counts.iter().product();
    if total > node_cap.saturating_mul(4) {
        return Err(Error::NodeCap {
            requested: total,
            cap: node_cap,
        });
    }
    let cell_inside = |idx: &[usize]| -> bool {
        let mut c = Point::zeros();
        for k in 0..dim {
            c[k] = 0.5 * (lines[k][idx[k]] + lines[k][idx[k] + 1]);
        }
        domain.contains_strict(&c)
    };

    // Grid nodes keyed by lexicographic (i, j, k) index.
    let mut used: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    let mut raw_elements: Vec<[usize; 3]> = Vec::new();
    let mut tets: Vec<Vec<[usize; 3]>> = Vec::new();
    if dim == 2 {
        for i in 0..counts[0] - 1 {
            for j in 0..counts[1] - 1 {
                if !cell_inside(&[i, j]) {
                    continue;
                }
                let c00 = [i, j, 0];
                let c10 = [i + 1, j, 0];
                let c11 = [i + 1, j + 1, 0];
                let c01 = [i, j + 1, 0];
                tets.push(vec![c00, c10, c11]);
                tets.push(vec![c00, c11, c01]);
            }
        }
    } else {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for i in 0..counts[0] - 1 {
            for j in 0..counts[1] - 1 {
                for k in 0..counts[2] - 1 {
                    if !cell_inside(&[i, j, k]) {
                        continue;
                    }
                    for p in PERMS {
                        let mut cur = [i, j, k];
                        let mut t = vec![cur];
                        for axis in p {
                            cur[axis] += 1;
                            t.push(cur);
                        }
                        tets.push(t);
                    }
                }
            }
        }
    }
    for t in &tets {
        for c in t {
            used.insert(*c, 0);
            raw_elements.push(*c);
        }
    }
    if used.len() > node_cap {
        return Err(Error::NodeCap {
            requested: used.len(),
            cap: node_cap,
        });
    }
    let mut nodes = Vec::with_capacity(used.len());
    for (n, (key, slot)) in used.iter_mut().enumerate() {
        *slot = n;
        let mut p = Point::zeros();
        for k in 0..dim {
            p[k] = lines[k][key[k]];
        }
        nodes.push(p);
    }
    let elements: Vec<usize> = raw_elements.iter().map(|c| used[c]).collect();
    SimplicialMesh::new(dim, nodes, elements)
}

/// Ear-clipping triangulation of a simple CCW polygon.
fn ear_clip(pts: &[Point]) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::new();
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if cross2(&(b - a), &(c - b)) <= 0.0 {
                continue;
            }
            let tri = [a, b, c];
            let blocked = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && {
                    let p = pts[j];
                    winding_number(&tri, &p) != 0
                        || crate::geometry::planar::boundary_distance(&tri, &p) < 1e-12
                }
            });
            if blocked {
                continue;
            }
            tris.extend([ia, ib, ic]);
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(Error::Geometry("ear clipping failed".into()));
        }
    }
    tris.extend(idx);
    Ok(tris)
}

fn ear_clipped(domain: &Polyhedron, h: f64, node_cap: usize) -> Result<SimplicialMesh> {
    if domain.dim() != 2 {
        return Err(Error::Mesh(
            "unstructured meshing is only available in 2D".into(),
        ));
    }
    let pts = domain.vertices();
    let tris = ear_clip(&pts)?;
    let mut mesh = SimplicialMesh::new(2, pts, tris)?;
    while mesh.max_diameter() > std::f64::consts::SQRT_2 * h {
        if mesh.num_nodes() * 4 > node_cap {
            return Err(Error::NodeCap {
                requested: mesh.num_nodes() * 4,
                cap: node_cap,
            });
        }
        mesh = refine_uniform(&mesh)?;
    }
    Ok(mesh)
}
