use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DyadicError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("signature dimension mismatch: {0} vs {1}")]
    SignatureDimension(usize, usize),
    #[error("expansion is missing coefficients: expected {expected} entries, found {found}")]
    Incomplete { expected: usize, found: usize },
    #[error("invalid cube: {0}")]
    InvalidCube(String),
}
