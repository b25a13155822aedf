//! P1 finite elements: quadrature, sparse operators, assembly, Krylov solvers
//! and a generalized eigensolver.

mod assembly;
mod eigen;
mod field;
mod quadrature;
mod solve;
mod sparse;

pub use assembly::{
    assemble_advection, assemble_mass, assemble_stiffness, assemble_weighted_mass,
    assemble_weighted_stiffness, element_geometry, load_vector, ElementGeometry, ElementRules,
    QuadPolicy, ScalarFn, VectorFn,
};
pub use eigen::{generalized_eig_extreme, EigenPair, Which};
pub use field::FemField;
pub use quadrature::{quadrature, QuadratureRule};
pub use solve::{cg_solve, cg_with, gmres, GmresInfo, SolveInfo};
pub use sparse::{LinearOperator, SparseOperator};
