//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MwgError {
    #[error("mesh resolution must be at least 1")]
    EmptyMesh,

    #[error("edge {edge} is not incident to element {element}")]
    NotIncident { element: usize, edge: usize },

    #[error("polynomial degree {0} outside supported range 1..=4")]
    UnsupportedDegree(usize),

    #[error("no triangle quadrature rule of exactness degree {0} (supported 1..=10)")]
    UnsupportedQuadratureDegree(usize),

    #[error("edge Gauss rule supports 1..=10 points, got {0}")]
    UnsupportedGaussCount(usize),

    #[error("element {element}: local mass solve residual {residual:.3e} exceeds tolerance")]
    DegenerateElement { element: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },

    #[error("dense solve limited to n <= {limit}, got n = {n}")]
    DenseTooLarge { n: usize, limit: usize },

    #[error("assembled matrix is not exactly symmetric at ({row}, {col})")]
    AsymmetricMatrix { row: usize, col: usize },

    #[error("cg did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    CgDiverged {
        iterations: usize,
        residual: f64,
        /// Best iterate found before giving up.
        best: Vec<f64>,
    },

    #[error("mesh levels must double between rows, got {0:?}")]
    NonDoublingLevels(Vec<usize>),

    #[error("level list is empty")]
    EmptyLevels,

    #[error("unknown manufactured case {0} (available: 1, 2, 3)")]
    UnknownCase(u8),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
