use dyadic_core::DyadicError;
use thiserror::Error;
use weights::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("invalid shift map: {0}")]
    Shift(String),
    #[error("dense dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}
