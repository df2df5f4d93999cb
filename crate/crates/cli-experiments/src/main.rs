use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cli_experiments::{experiments, CliError, ExperimentConfig};

/// Matrix-weighted dyadic experiments.
#[derive(Parser)]
#[command(name = "haarweight", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// A_p characteristic and reducing-operator calculus.
    Apchar(Io),
    /// Weighted norm of one operator.
    Opnorm(Io),
    /// Weighted BMO variants, shifted grids and covering.
    Bmo(Io),
    /// Carleson conditions, lemma and embedding.
    Carleson(Io),
    /// Stopping-time generations.
    Stopping(Io),
    /// Weak type and pointwise bounds of the maximal functions.
    Maximal(Io),
    /// Sparse family, certificate and chain.
    Sparse(Io),
    /// Divergence for the power weight.
    Counterexample(Io),
    /// Measured norms against bound curves over an alpha sweep.
    Sweep(Io),
    /// The three embedding conditions on random instances.
    Equivalence(Io),
}

impl Command {
    fn parts(&self) -> (&'static str, &Io) {
        match self {
            Command::Apchar(io) => ("apchar", io),
            Command::Opnorm(io) => ("opnorm", io),
            Command::Bmo(io) => ("bmo", io),
            Command::Carleson(io) => ("carleson", io),
            Command::Stopping(io) => ("stopping", io),
            Command::Maximal(io) => ("maximal", io),
            Command::Sparse(io) => ("sparse", io),
            Command::Counterexample(io) => ("counterexample", io),
            Command::Sweep(io) => ("sweep", io),
            Command::Equivalence(io) => ("equivalence", io),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, io) = cli.command.parts();
    let outcome = ExperimentConfig::load(&io.config).and_then(|cfg| {
        let report = experiments::run(name, &cfg)?;
        report.write(&io.out)?;
        Ok::<_, CliError>(report)
    });
    match outcome {
        Ok(report) if report.passed() => {
            for a in &report.assertions {
                println!("PASS {}", a.name);
            }
            ExitCode::SUCCESS
        }
        Ok(report) => {
            for a in &report.assertions {
                println!("{} {}", if a.passed { "PASS" } else { "FAIL" }, a.name);
            }
            eprintln!("{}", report.diagnostics());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("haarweight {name}: {e}");
            ExitCode::from(1)
        }
    }
}
