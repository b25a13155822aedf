//! The weighted Dirichlet problem `-Δu = f` in the domain, `u = g` on its
//! boundary, solved by P1 finite elements.
//!
//! Boundary data are removed by a minimal extension, the weight index `a`
//! by conjugation with `w^a` (see [`conjugate_operator`]), and the remaining
//! zero-trace problem is solved for the form `int grad u . grad v`.

mod conjugate;
mod study;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{CG_MAXIT, CG_TOL, GMRES_MAXIT, GMRES_RESTART, OVERFLOW_GUARD};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fem::{
    cg_solve, element_geometry, gmres, ElementRules, FemField, QuadPolicy, SparseOperator,
};
use crate::geometry::{Point, Polyhedron};
use crate::mesh::SimplicialMesh;
use crate::numeric::{dot, norm2, par_map_range, sum};
use crate::sobolev::{k_dual_norm, k_norm, trace_norm_surrogate, BoundaryField, NormSpec};
use crate::weights::WeightField;

pub use conjugate::{
    conjugate_operator, conjugation_lipschitz, relative_operator_norm, ConjugationFamily,
    LipschitzEstimate, MAX_INDEX,
};
pub use study::{
    bump_basis, convergence_study, mapping_study, regularity_ratio, weight_window_probe, Bump,
    ConvergenceRow, ConvergenceTable, MappingStudy, RegularityRatio, WindowEstimate, WindowPoint,
    WINDOW_THRESHOLD,
};

/// Scalar data on the domain: a source term or boundary values.
#[derive(Clone, Default)]
pub enum Data {
    #[default]
    Zero,
    Expr(Expr),
    /// One value per mesh node, read as a P1 field.
    Nodal(Vec<f64>),
    Function(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for Data {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl Data {
    pub fn function(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Data::Function(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Data::Zero)
    }

    pub fn describe(&self) -> String {
        match self {
            Data::Zero => "zero".into(),
            Data::Expr(e) => format!("expr: {}", e.source()),
            Data::Nodal(v) => format!("nodal ({} values)", v.len()),
            Data::Function(_) => "closure".into(),
        }
    }

    /// Value at a quadrature point `x` of element `el` with barycentric `lam`.
    fn at(&self, x: &Point, el: &[usize], lam: &[f64; 4]) -> Result<f64> {
        match self {
            Data::Zero => Ok(0.0),
            Data::Expr(e) => e.eval(x),
            Data::Nodal(v) => Ok(el.iter().enumerate().map(|(k, &i)| v[i] * lam[k]).sum()),
            Data::Function(f) => Ok(f(x)),
        }
    }

    /// Value at mesh node `i`.
    fn at_node(&self, m: &SimplicialMesh, i: usize) -> Result<f64> {
        match self {
            Data::Zero => Ok(0.0),
            Data::Expr(e) => e.eval(&m.node(i)),
            Data::Nodal(v) => Ok(v[i]),
            Data::Function(f) => Ok(f(&m.node(i))),
        }
    }

    fn check_len(&self, m: &SimplicialMesh, what: &str) -> Result<()> {
        match self {
            Data::Nodal(v) if v.len() != m.num_nodes() => Err(Error::InvalidArgument(format!(
                "{what}: {} nodal values for a mesh with {} nodes",
                v.len(),
                m.num_nodes()
            ))),
            _ => Ok(()),
        }
    }
}

/// Which operator the source belongs to. The discrete form is always
/// `int grad u . grad v = <F, v>`; `Laplacian` means `Δu = f`, so `F = -f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    NegativeLaplacian,
    Laplacian,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::NegativeLaplacian => 1.0,
            Sign::Laplacian => -1.0,
        }
    }

    pub fn equation(self) -> &'static str {
        match self {
            Sign::NegativeLaplacian => "-lap u = f",
            Sign::Laplacian => "lap u = f",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvpProblem<'m> {
    pub domain: Polyhedron,
    pub mesh: &'m SimplicialMesh,
    pub f: Data,
    pub g: Data,
    /// Weight index of the source space `K^{mu-1}_{a-1}`.
    pub a: f64,
    pub sign: Sign,
    /// Regularity order of the norm table (0 or 1).
    pub mu: i32,
    /// Weight used for conjugation and all norms; defaults to `eta`.
    pub weight: WeightField,
}

impl<'m> BvpProblem<'m> {
    pub fn new(domain: &Polyhedron, mesh: &'m SimplicialMesh) -> Self {
        BvpProblem {
            domain: domain.clone(),
            mesh,
            f: Data::Zero,
            g: Data::Zero,
            a: 0.0,
            sign: Sign::default(),
            mu: 0,
            weight: WeightField::eta(domain),
        }
    }

    pub fn source(mut self, f: Data) -> Self {
        self.f = f;
        self
    }

    pub fn boundary(mut self, g: Data) -> Self {
        self.g = g;
        self
    }

    pub fn index(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn order(mut self, mu: i32) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        conjugate::check_index(self.a)?;
        if !(0..=1).contains(&self.mu) {
            return Err(Error::InvalidArgument(format!(
                "norm table order must be 0 or 1, got {}",
                self.mu
            )));
        }
        if self.mesh.dim() != self.domain.dim() {
            return Err(Error::InvalidArgument(
                "mesh and domain dimensions differ".into(),
            ));
        }
        self.f.check_len(self.mesh, "source")?;
        self.g.check_len(self.mesh, "boundary data")?;
        Ok(())
    }
}

/// `int f w^p phi_i` for every node `i`.
pub fn weighted_pairing(m: &SimplicialMesh, f: &Data, w: &WeightField, p: f64) -> Result<Vec<f64>> {
    if f.is_zero() {
        return Ok(vec![0.0; m.num_nodes()]);
    }
    let rules = ElementRules::new(m.dim(), QuadPolicy::default())?;
    let wp = w.power(p);
    let k = m.dim() + 1;
    let locals = par_map_range(m.num_elements(), |e| -> Result<Vec<f64>> {
        let g = element_geometry(&m.element_points(e));
        let el = m.element(e);
        let mut v = vec![0.0; k];
        for (x, lam, wq) in rules.points(m, e, &g) {
            let s = if p == 0.0 { 1.0 } else { wp.eval(&x)? };
            let fx = f.at(&x, el, &lam)? * s;
            for a in 0..k {
                v[a] += wq * fx * lam[a];
            }
        }
        Ok(v)
    });
    let mut acc = vec![crate::numeric::CompensatedSum::new(); m.num_nodes()];
    for (e, l) in locals.into_iter().enumerate() {
        for (a, val) in l?.into_iter().enumerate() {
            acc[m.element(e)[a]].add(val);
        }
    }
    let out: Vec<f64> = acc.iter().map(|c| c.value()).collect();
    if let Some(v) = out
        .iter()
        .find(|v| !(v.is_finite() && v.abs() <= OVERFLOW_GUARD))
    {
        return Err(Error::InadmissibleIndex {
            term: format!("source pairing with w^{p}"),
            value: *v,
        });
    }
    Ok(out)
}

/// `(int w^{2t} f^2)^{1/2}` by quadrature.
pub fn weighted_l2(m: &SimplicialMesh, f: &Data, w: &WeightField, t: f64) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let rules = ElementRules::new(m.dim(), QuadPolicy::default())?;
    let wp = w.power(2.0 * t);
    let parts = par_map_range(m.num_elements(), |e| -> Result<f64> {
        let g = element_geometry(&m.element_points(e));
        let el = m.element(e);
        let mut acc = 0.0;
        for (x, lam, wq) in rules.points(m, e, &g) {
            acc += wq * wp.eval(&x)? * f.at(&x, el, &lam)?.powi(2);
        }
        Ok(acc)
    });
    let v = sum(parts.into_iter().collect::<Result<Vec<_>>>()?);
    if !(v.is_finite() && v <= OVERFLOW_GUARD) {
        return Err(Error::InadmissibleIndex {
            term: format!("||w^{t} f||^2"),
            value: v,
        });
    }
    Ok(v.sqrt())
}

/// The minimal extension of the boundary data and its surrogate norm.
#[derive(Debug, Clone, Serialize)]
pub struct Lift {
    /// Nodal values: `g` on the boundary, the `K^1_1`-minimal extension inside.
    pub values: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
}

/// Extends `g` into the domain; the reduced problem has zero boundary data
/// and the lift enters its right-hand side through the form.
pub fn lift_boundary_data(problem: &BvpProblem) -> Result<Lift> {
    problem.validate()?;
    let m = problem.mesh;
    if problem.g.is_zero() {
        return Ok(Lift {
            values: vec![0.0; m.num_nodes()],
            norm: 0.0,
            iterations: 0,
        });
    }
    let values = m
        .boundary_nodes()
        .iter()
        .map(|&i| problem.g.at_node(m, i))
        .collect::<Result<Vec<_>>>()?;
    let g = BoundaryField::new(m, values)?;
    let ext = trace_norm_surrogate(&g, m, &problem.weight)?;
    Ok(Lift {
        values: ext.extension,
        norm: ext.value,
        iterations: ext.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Cg,
    Gmres,
    None,
}

/// `||u||_{K^{mu+1}_{a+1}}`, `||f||_{K^{mu-1}_{a-1}}`, the boundary surrogate
/// `||g||` and `||u||_{K^0_1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTable {
    pub mu: i32,
    pub a: f64,
    pub solution: f64,
    pub source: f64,
    pub boundary: f64,
    pub solution_l2: f64,
}

impl NormTable {
    /// `||u|| / (||f|| + ||g|| + ||u||_{K^0_1})`, undefined for the zero solution.
    pub fn stability_ratio(&self) -> Option<f64> {
        let den = self.source + self.boundary + self.solution_l2;
        (den > 0.0).then(|| self.solution / den)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: Vec<f64>,
    pub equation: &'static str,
    pub sign: Sign,
    pub a: f64,
    pub solver: Solver,
    pub iterations: usize,
    /// Relative algebraic residual of the reduced system.
    pub residual: f64,
    /// `B_a(u~, u~)` of the reduced unknown.
    pub energy: f64,
    pub lift_iterations: usize,
    pub norms: NormTable,
    pub stability_ratio: Option<f64>,
}

/// Reduced system on the interior nodes: matrix, right-hand side and the lift.
pub(crate) struct Reduced {
    pub matrix: SparseOperator,
    pub rhs: Vec<f64>,
    pub interior: Vec<usize>,
    pub lift: Lift,
}

pub(crate) fn reduce(problem: &BvpProblem, family: Option<&ConjugationFamily>) -> Result<Reduced> {
    problem.validate()?;
    let m = problem.mesh;
    let a = problem.a;
    let lift = lift_boundary_data(problem)?;
    let full = match family {
        Some(f) => f.member(a)?,
        None => conjugate_operator(a, m, &problem.weight)?,
    };
    let interior = m.interior_nodes();
    if interior.is_empty() {
        return Err(Error::MeshTooCoarse("no interior node".into()));
    }
    let load = weighted_pairing(m, &problem.f, &problem.weight, -a)?;
    let coupling = if problem.g.is_zero() {
        vec![0.0; m.num_nodes()]
    } else {
        conjugate::lift_coupling(m, &problem.weight, a)?.matvec(&lift.values)
    };
    let s = problem.sign.factor();
    let rhs = interior
        .iter()
        .map(|&i| s * load[i] - coupling[i])
        .collect();
    Ok(Reduced {
        matrix: full.restrict(&interior),
        rhs,
        interior,
        lift,
    })
}

/// Solves the discrete Dirichlet problem and fills the norm table.
pub fn solve_dirichlet(problem: &BvpProblem) -> Result<SolveReport> {
    let red = reduce(problem, None)?;
    let m = problem.mesh;
    let a = problem.a;
    let (x, solver, iterations) = if norm2(&red.rhs) == 0.0 {
        (vec![0.0; red.interior.len()], Solver::None, 0)
    } else if a == 0.0 {
        let s = cg_solve(&red.matrix, &red.rhs, CG_TOL, CG_MAXIT)?;
        (s.x, Solver::Cg, s.iterations)
    } else {
        let s = gmres(
            &red.matrix,
            &red.matrix.diagonal(),
            &red.rhs,
            CG_TOL,
            GMRES_RESTART,
            GMRES_MAXIT,
        )?;
        if s.min_rayleigh <= 0.0 {
            return Err(Error::CoercivityLost {
                a,
                energy: s.min_rayleigh,
            });
        }
        (s.x, Solver::Gmres, s.iterations)
    };
    let ax = red.matrix.matvec(&x);
    let energy = dot(&x, &ax);
    if solver != Solver::None && energy <= 0.0 {
        return Err(Error::CoercivityLost { a, energy });
    }
    let bn = norm2(&red.rhs);
    let residual = if bn == 0.0 {
        0.0
    } else {
        norm2(
            &ax.iter()
                .zip(&red.rhs)
                .map(|(p, q)| p - q)
                .collect::<Vec<_>>(),
        ) / bn
    };
    let mut u = red.lift.values.clone();
    for (&i, v) in red.interior.iter().zip(&x) {
        let scale = if a == 0.0 {
            1.0
        } else {
            problem.weight.power(a).eval(&m.node(i))?
        };
        u[i] += scale * v;
    }
    let norms = norm_table(problem, &u, red.lift.norm)?;
    Ok(SolveReport {
        stability_ratio: norms.stability_ratio(),
        solution: u,
        equation: problem.sign.equation(),
        sign: problem.sign,
        a,
        solver,
        iterations,
        residual,
        energy,
        lift_iterations: red.lift.iterations,
        norms,
    })
}

/// Norms of a computed solution at the problem's order and index.
pub fn norm_table(problem: &BvpProblem, u: &[f64], boundary: f64) -> Result<NormTable> {
    let m = problem.mesh;
    let (mu, a, w) = (problem.mu, problem.a, &problem.weight);
    let field = FemField::new(m, u.to_vec())?;
    let solution = k_norm(&field, NormSpec::domain(mu + 1, a + 1.0), w)?.value;
    let solution_l2 = k_norm(&field, NormSpec::domain(0, 1.0), w)?.value;
    let source = if problem.f.is_zero() {
        0.0
    } else if mu == 0 {
        let load = weighted_pairing(m, &problem.f, w, 0.0)?;
        k_dual_norm(&load, 1, 1.0 - a, m, w)?.value
    } else {
        weighted_l2(m, &problem.f, w, 1.0 - a)?
    };
    Ok(NormTable {
        mu,
        a,
        solution,
        source,
        boundary,
        solution_l2,
    })
}
