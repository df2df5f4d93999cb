//! One module per subcommand.

pub mod apchar;
pub mod bmo;
pub mod carleson;
pub mod counterexample;
pub mod equivalence;
pub mod maximal;
pub mod opnorm;
pub mod sparse;
pub mod stopping;
pub mod sweep;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::Report;

pub const NAMES: [&str; 10] = ["apchar", "opnorm", "bmo", "carleson", "stopping", "maximal", "sparse", "counterexample", "sweep", "equivalence"];

pub fn run(name: &str, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match name {
        "apchar" => apchar::run(cfg),
        "opnorm" => opnorm::run(cfg),
        "bmo" => bmo::run(cfg),
        "carleson" => carleson::run(cfg),
        "stopping" => stopping::run(cfg),
        "maximal" => maximal::run(cfg),
        "sparse" => sparse::run(cfg),
        "counterexample" => counterexample::run(cfg),
        "sweep" => sweep::run(cfg),
        "equivalence" => equivalence::run(cfg),
        other => Err(CliError::Config(format!("unknown experiment '{other}'"))),
    }
}
