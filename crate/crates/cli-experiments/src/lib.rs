//! Experiment driver: each subcommand reads an [`ExperimentConfig`], runs its
//! checks and returns a [`Report`] of tables and assertions.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod report;
pub mod symbols;

pub use config::{DepthRange, ExperimentConfig};
pub use error::CliError;
pub use report::{Assertion, Cell, Report, Table};
