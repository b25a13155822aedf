//! Hardy-Poincaré constants `int |u|^2/eta^2 <= C int |grad u|^2` for
//! zero-trace fields: the constructive constant assembled from a cover of
//! the domain by edge cylinders, vertex cones and vertex balls (vertex
//! sectors in 2D), and the variational constant from a discrete eigenproblem.

mod constants;
mod kappa;
mod region;

pub use constants::{
    cap_constant, cap_constant_at, cap_eigenvalue, link_mesh, sector_constant, sector_constant_fem,
    CapConstant, CAP_LEVELS, SECTOR_FEM_CELLS,
};
pub use kappa::{
    constructive_kappa, dirichlet_eigenvalue, variational_kappa, KappaTerm, PoincareCertificate,
    Provenance, RegionConstant, ResidualBound, VariationalKappa,
};
pub use region::{
    build_decomposition, region_inequality_check, region_inequality_check_with, Decomposition,
    Region, RegionCheck, RegionKind, MAX_HALVINGS, SAMPLES_PER_REGION,
};

#[cfg(test)]
mod tests;
