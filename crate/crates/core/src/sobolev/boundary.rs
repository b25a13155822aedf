use serde::Serialize;

use super::{gram_operator, NormReport, NormSpec, QuadratureInfo};
use crate::config::{CG_MAXIT, CG_TOL, SINGULAR_QUAD_DEGREE};
use crate::error::{Error, Result};
use crate::fem::{cg_solve, element_geometry, quadrature, FemField, QuadPolicy};
use crate::geometry::Point;
use crate::mesh::{NodeFlag, SimplicialMesh};
use crate::numeric::CompensatedSum;
use crate::weights::WeightField;

/// Nodal values on the boundary nodes of a mesh (ascending node order).
#[derive(Debug, Clone)]
pub struct BoundaryField<'m> {
    mesh: &'m SimplicialMesh,
    nodes: Vec<usize>,
    values: Vec<f64>,
}

impl<'m> BoundaryField<'m> {
    pub fn new(mesh: &'m SimplicialMesh, values: Vec<f64>) -> Result<Self> {
        let nodes = mesh.boundary_nodes();
        if nodes.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "boundary field has {} values for {} boundary nodes",
                values.len(),
                nodes.len()
            )));
        }
        Ok(BoundaryField {
            mesh,
            nodes,
            values,
        })
    }

    pub fn from_fn(mesh: &'m SimplicialMesh, g: impl Fn(&Point) -> f64) -> Self {
        let nodes = mesh.boundary_nodes();
        let values = nodes.iter().map(|&i| g(&mesh.node(i))).collect();
        BoundaryField {
            mesh,
            nodes,
            values,
        }
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        self.mesh
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Full nodal vector with zeros at interior nodes.
    pub fn to_nodal(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.mesh.num_nodes()];
        for (&i, &g) in self.nodes.iter().zip(&self.values) {
            v[i] = g;
        }
        v
    }
}

/// Nodal restriction to the boundary.
pub fn trace<'m>(u: &FemField<'m>) -> BoundaryField<'m> {
    let m = u.mesh_ref();
    let nodes = m.boundary_nodes();
    let values = nodes.iter().map(|&i| u.values()[i]).collect();
    BoundaryField {
        mesh: m,
        nodes,
        values,
    }
}

/// Boundary `K^mu_a` norm (mu in {0, 1}) with facetwise tangential derivatives.
pub fn integer_boundary_norm(
    g: &BoundaryField,
    mu: i32,
    a: f64,
    w: &WeightField,
) -> Result<NormReport> {
    let spec = NormSpec::boundary(mu, a);
    spec.validate()?;
    let m = g.mesh;
    let d = m.dim();
    let nodal = g.to_nodal();
    let regular = crate::config::DEFAULT_QUAD_DEGREE;
    let rule_r = quadrature(d - 1, regular)?;
    let rule_s = quadrature(d - 1, SINGULAR_QUAD_DEGREE)?;
    let w0 = w.power(-2.0 * a);
    let w1 = w.power(2.0 * (1.0 - a));
    let mut t0 = CompensatedSum::new();
    let mut t1 = CompensatedSum::new();
    let mut singular_facets = 0;
    for f in 0..m.num_boundary_facets() {
        let idx = m.boundary_facet(f);
        let pts: Vec<Point> = idx.iter().map(|&i| m.node(i)).collect();
        let geo = element_geometry(&pts);
        let sing = idx
            .iter()
            .any(|&i| m.flags()[i] == NodeFlag::BoundarySingular);
        singular_facets += sing as usize;
        let rule = if sing { &rule_s } else { &rule_r };
        let scale = geo.measure * if d == 2 { 1.0 } else { 2.0 };
        let grad: Point = idx
            .iter()
            .zip(&geo.grads)
            .map(|(&i, gr)| gr * nodal[i])
            .sum();
        let mut wint = 0.0;
        for q in 0..rule.len() {
            let lam = rule.barycentric(q, d - 1);
            let x: Point = (0..d).map(|k| pts[k] * lam[k]).sum();
            let gv: f64 = (0..d).map(|k| nodal[idx[k]] * lam[k]).sum();
            let wq = rule.weights[q] * scale;
            let v0 = w0.eval(&x)?;
            if !(v0 > 0.0 && v0.is_finite()) {
                return Err(Error::NonpositiveWeight { value: v0 });
            }
            t0.add(wq * v0 * gv * gv);
            if mu >= 1 {
                wint += wq * w1.eval(&x)?;
            }
        }
        if mu >= 1 {
            t1.add(wint * grad.norm_squared());
        }
    }
    let mut sq = vec![(vec![0u8], t0.value())];
    if mu >= 1 {
        sq.push((vec![1u8], t1.value()));
    }
    let quad = QuadratureInfo {
        regular_degree: regular,
        singular_degree: SINGULAR_QUAD_DEGREE,
        singular_elements: singular_facets,
    };
    let mut rep = NormReport::from_terms(spec, w, sq, quad)?;
    rep.notes
        .push("boundary derivatives are tangential, facet by facet".into());
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceExtension {
    /// `min { ||U||_{K^1_1} : U = g on the boundary }`.
    pub value: f64,
    /// The minimizing P1 field on all nodes.
    pub extension: Vec<f64>,
    pub iterations: usize,
}

/// Minimal-extension norm of boundary data: the `K^1_1` norm of the
/// discrete `K^1_1`-minimal extension of `g`.
pub fn trace_norm_surrogate(
    g: &BoundaryField,
    m: &SimplicialMesh,
    w: &WeightField,
) -> Result<TraceExtension> {
    if !std::ptr::eq(g.mesh, m)
        && (g.mesh.num_nodes() != m.num_nodes() || g.nodes != m.boundary_nodes())
    {
        return Err(Error::InvalidArgument(
            "boundary field belongs to a different mesh".into(),
        ));
    }
    let gram = gram_operator(m, 1, 1.0, w, None, QuadPolicy::default())?;
    let inner = m.interior_nodes();
    let gb = g.to_nodal();
    let rhs_full = gram.matvec(&gb);
    let rhs: Vec<f64> = inner.iter().map(|&i| -rhs_full[i]).collect();
    let sol = cg_solve(&gram.restrict(&inner), &rhs, CG_TOL, CG_MAXIT)?;
    let mut u = gb;
    for (&i, v) in inner.iter().zip(&sol.x) {
        u[i] = *v;
    }
    let value = gram.form(&u, &u).max(0.0).sqrt();
    Ok(TraceExtension {
        value,
        extension: u,
        iterations: sol.iterations,
    })
}
