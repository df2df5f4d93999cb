use dyadic_core::DyadicError;
use operators::OperatorError;
use thiserror::Error;
use weights::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaximalError {
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("family is not sparse: {0}")]
    NotSparse(String),
    #[error("{0}")]
    InvalidInput(String),
}
