use carleson_bmo::CarlesonError;
use dyadic_core::DyadicError;
use maximal_sparse::MaximalError;
use operators::OperatorError;
use thiserror::Error;
use weights::WeightError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Carleson(#[from] CarlesonError),
    #[error(transparent)]
    Maximal(#[from] MaximalError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

