use dyadic_core::{Cube, DyadicError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("power |x|^{exponent} is not integrable on cube {cube:?}")]
    Integrability { exponent: f64, cube: Cube },
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("leaf table has {found} entries, grid needs {expected}")]
    LeafCount { expected: usize, found: usize },
    #[error("ellipsoid iteration stopped at eta = {achieved_eta:.3e} after {iterations} steps")]
    Certification { achieved_eta: f64, iterations: usize },
    #[error("exponent p = {0} must lie in (1, ∞)")]
    Exponent(f64),
    #[error(transparent)]
    Grid(#[from] DyadicError),
}
