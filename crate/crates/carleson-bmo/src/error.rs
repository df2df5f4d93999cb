use dyadic_core::{Cube, DyadicError};
use operators::OperatorError;
use thiserror::Error;
use weights::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarlesonError {
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("stopping threshold {name} = {value} must exceed 1")]
    Threshold { name: &'static str, value: f64 },
    #[error("reducing operator on {0:?} is singular")]
    Singular(Cube),
    #[error("{0}")]
    InvalidInput(String),
}
