//! Symbols, sequences and test functions shared by the experiments.

use dyadic_core::{Grid, Shape, StepFunction};
use nalgebra::DMatrix;
use operators::{MatrixSequence, MatrixSymbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

pub fn swap() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// Exact leaf averages of `log x` on `[0, 1)`.
pub fn log_step(g: &Grid) -> Result<StepFunction, CliError> {
    if g.d() != 1 {
        return Err(CliError::Config("the log symbol is defined for d = 1".into()));
    }
    let prim = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() - x };
    Ok(StepFunction::from_fn(g, Shape::Scalar, |j, o| {
        let (lower, side) = g.geometry(g.leaf(j));
        let (a, b) = (lower[0], lower[0] + side);
        o[0] = (prim(b) - prim(a)) / side;
    }))
}

/// `log|x| · [[0,1],[1,0]]`.
pub fn log_swap(g: &Grid) -> Result<MatrixSymbol, CliError> {
    Ok(MatrixSymbol::scalar_times(&log_step(g)?, &swap())?)
}

/// Entries uniform in `[-1, 1]` on every leaf.
pub fn random_symbol(g: &Grid, n: usize, seed: u64) -> MatrixSymbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixSymbol::new(StepFunction::from_fn(g, Shape::Matrix(n), |_, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)))).expect("matrix shape")
}

pub fn symbol(name: &str, g: &Grid, n: usize, seed: u64) -> Result<MatrixSymbol, CliError> {
    match name {
        "log-swap" => {
            if n != 2 {
                return Err(CliError::Config("log-swap needs n = 2".into()));
            }
            log_swap(g)
        }
        "random" => Ok(random_symbol(g, n, seed)),
        other => Err(CliError::Config(format!("unknown symbol '{other}'"))),
    }
}

/// `A_I^ε = ±Id` with independent random signs.
pub fn random_signs(g: &Grid, n: usize, seed: u64) -> MatrixSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixSequence::from_fn(g, n, |_, _| DMatrix::identity(n, n) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
}

/// Sparse random sequence: each `A_I^ε` is nonzero with probability `keep`.
pub fn random_sequence(g: &Grid, n: usize, keep: f64, seed: u64) -> MatrixSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixSequence::from_fn(g, n, |c, _| {
        if rng.random_bool(keep) {
            DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)) * g.measure_at(c.level).sqrt()
        } else {
            DMatrix::zeros(n, n)
        }
    })
}

pub fn random_vector(g: &Grid, n: usize, seed: u64) -> StepFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StepFunction::from_fn(g, Shape::Vector(n), |_, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)))
}
