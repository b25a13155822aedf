use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // --- input validation ---
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("point {0:?} lies outside the closed domain")]
    OutsideDomain([f64; 3]),
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("mesh file {path}: line {line}: {msg}")]
    MeshFile {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("node cap exceeded: {requested} nodes requested, cap is {cap}")]
    NodeCap { requested: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("schema violation at `{path}`: {msg}")]
    Schema { path: String, msg: String },
    #[error("expression `{expr}`: {msg}")]
    Expression { expr: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    // --- numerical failures ---
    #[error("iterative solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error(
        "operator is not positive definite (curvature {curvature:e} at iteration {iteration})"
    )]
    Indefinite { iteration: usize, curvature: f64 },
    #[error("coercivity lost for weight index a = {a}: energy {energy:e}")]
    CoercivityLost { a: f64, energy: f64 },
    #[error("inadmissible index: weighted term {term} = {value:e} exceeds the overflow guard")]
    InadmissibleIndex { term: String, value: f64 },
    #[error("weight evaluates to {value:e} at a quadrature point")]
    NonpositiveWeight { value: f64 },
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),
    #[error("degenerate region: {0}")]
    Degenerate(String),
    #[error("decomposition search exhausted after {0} halvings")]
    DecompositionExhausted(usize),
    #[error("certificate check failed: {0}")]
    Certificate(String),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Geometry(_)
                | Error::IndexOutOfRange { .. }
                | Error::OutsideDomain(_)
                | Error::Mesh(_)
                | Error::MeshFile { .. }
                | Error::NodeCap { .. }
                | Error::InvalidArgument(_)
                | Error::Schema { .. }
                | Error::Expression { .. }
                | Error::Io { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
