//! Fixed tolerances and defaults shared across the crate.

/// Tolerance for every geometric predicate (collinearity, on-face, angle tests).
pub const GEOM_TOL: f64 = 1e-12;

/// A node counts as lying on the singular set when its distance is below this.
pub const SINGULAR_NODE_TOL: f64 = 1e-10;

/// Any single weighted integral above this aborts with an inadmissible-index diagnosis.
pub const OVERFLOW_GUARD: f64 = 1e30;

/// Default upper bound on mesh size.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Quadrature degree on elements touching the singular set.
pub const SINGULAR_QUAD_DEGREE: usize = 5;

/// Default quadrature degree elsewhere.
pub const DEFAULT_QUAD_DEGREE: usize = 3;

/// Default relative tolerance for inner conjugate-gradient solves.
pub const CG_TOL: f64 = 1e-12;

/// Default iteration cap for conjugate gradients.
pub const CG_MAXIT: usize = 20_000;

/// Relative tolerance for eigenvalue iterations.
pub const EIG_TOL: f64 = 1e-10;

/// Schema version written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Krylov dimension between GMRES restarts.
pub const GMRES_RESTART: usize = 60;

/// Iteration cap for GMRES.
pub const GMRES_MAXIT: usize = 20_000;

/// Lower bound on the smallest element angle (interior in 2D, dihedral in 3D)
/// for meshes of the built-in generators and their red refinements.
pub const MIN_ANGLE_FLOOR: f64 = std::f64::consts::PI / 12.0;
