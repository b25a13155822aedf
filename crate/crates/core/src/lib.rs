//! Weighted Sobolev (Kondratiev) spaces on polyhedral domains: geometry,
//! meshing, distance weights, P1 finite elements, weighted norms, Hardy-type
//! Poincaré constants and the weighted Dirichlet problem.

pub mod config;
pub mod error;
pub mod expr;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod numeric;
pub mod poincare;
pub mod report;
pub mod sobolev;
pub mod weights;
pub mod wellposed;

pub use error::{Error, Result};
pub use geometry::{Generator, Point, Polyhedron};
pub use mesh::{GradingSpec, SimplicialMesh};
