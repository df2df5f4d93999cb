//! The three Carleson embedding conditions (a), (b), (c) on random `(A, W)` at `p = 2`.

use carleson_bmo::{carleson_b_from_table, carleson_c_from_table};
use dyadic_core::Grid;
use operators::{weighted_operator_norm, BigPi, MatrixSequence, NormOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use weights::{reducing_table, LeafWeights, MatrixWeight, ReducingOptions};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::fit::fit_power;
use crate::report::{Report, Table};

/// Relative tolerance of the exact inequalities.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Instance {
    pub a2: f64,
    /// `‖Π_A‖²`.
    pub big_pi_sq: f64,
    /// `‖A‖_*`.
    pub b: f64,
    /// `C_c`.
    pub c: f64,
}

/// Instance `k` of the ensemble: mostly `d = 1`, `L ≤ 6`, every fourth in the plane.
pub fn instance(seed: u64, k: u64, no: &NormOptions) -> Result<Instance, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(k));
    let (d, depth) = if k % 4 == 3 { (2, rng.random_range(1..=3)) } else { (1, rng.random_range(2..=6)) };
    let g = Grid::new(d, depth)?;
    let w = MatrixWeight::RandomSpd { seed: seed.wrapping_add(k), cond: rng.random_range(1.0..200.0), n: 2 };
    let scale = rng.random_range(0.1..3.0);
    let a = MatrixSequence::random(&g, 2, scale, seed.wrapping_add(10_000 + k));
    evaluate(&a, &w, no)
}

pub fn evaluate(a: &MatrixSequence, w: &MatrixWeight, no: &NormOptions) -> Result<Instance, CliError> {
    let g = a.grid();
    let lw = LeafWeights::new(w, g)?;
    let table = reducing_table(&lw.to_weight(), g, 2.0, &ReducingOptions::default())?;
    let pi = weighted_operator_norm(&BigPi::new(a, &table, &lw)?, None, 2.0, no)?.value;
    Ok(Instance {
        a2: table.characteristic().0,
        big_pi_sq: pi * pi,
        b: carleson_b_from_table(a, &table)?.norm,
        c: carleson_c_from_table(a, &table)?.constant().norm,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let samples = cfg.samples.unwrap_or(200);
    let no = NormOptions::default();
    let mut report = Report::new("equivalence", &cfg.id);
    let mut t = Table::new(
        "equivalence",
        &[
            ("instance", "index"),
            ("A2", "sup ‖V_I V_I′‖²"),
            ("big_pi_sq", "‖Π_A‖² on L²"),
            ("condition_b", "‖A‖_*"),
            ("condition_c", "C_c"),
            ("c_over_pi", "C_c / ‖Π_A‖²"),
            ("c_over_nb", "C_c / (n‖A‖_*)"),
            ("pi_over_b", "‖Π_A‖² / ‖A‖_*"),
            ("b_over_a2c", "‖A‖_* / (A₂ C_c)"),
        ],
    );
    let n = 2.0;
    let (mut pi_violations, mut nb_violations) = (0usize, 0usize);
    let mut rows = Vec::new();
    for k in 0..samples as u64 {
        let r = instance(cfg.seed, k, &no)?;
        if r.c > r.big_pi_sq * (1.0 + EXACT_TOL) {
            pi_violations += 1;
        }
        if r.c > n * r.b * (1.0 + EXACT_TOL) {
            nb_violations += 1;
        }
        t.push(vec![k.into(), r.a2.into(), r.big_pi_sq.into(), r.b.into(), r.c.into(), (r.c / r.big_pi_sq).into(), (r.c / (n * r.b)).into(), (r.big_pi_sq / r.b).into(), (r.b / (r.a2 * r.c)).into()]);
        rows.push(r);
    }
    report.tables.push(t);
    report.check("C_c ≤ ‖Π_A‖² on every instance", pi_violations == 0, json!({ "instances": samples, "violations": pi_violations, "tolerance": EXACT_TOL }));
    report.check("C_c ≤ n‖A‖_* on every instance", nb_violations == 0, json!({ "instances": samples, "violations": nb_violations }));

    let max = |f: &dyn Fn(&Instance) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    report.set("largest_c_over_pi", json!(max(&|r| r.c / r.big_pi_sq)));
    report.set("fitted_pi_over_b_a2_cubed", json!(max(&|r| r.big_pi_sq / (r.b * r.a2.powi(3)))));
    report.set("fitted_b_over_a2_c", json!(max(&|r| r.b / (r.a2 * r.c))));
    if rows.len() >= 2 {
        let a2: Vec<f64> = rows.iter().map(|r| r.a2).collect();
        let ratio: Vec<f64> = rows.iter().map(|r| r.big_pi_sq / r.b).collect();
        report.set("pi_over_b_exponent_in_a2", json!(fit_power(&a2, &ratio).slope));
    }

    let g = Grid::new(1, 3)?;
    let zero = evaluate(&MatrixSequence::zeros(&g, 2), &MatrixWeight::RandomSpd { seed: cfg.seed, cond: 10.0, n: 2 }, &no)?;
    report.check("A ≡ 0 gives zero in all three conditions", zero.big_pi_sq == 0.0 && zero.b == 0.0 && zero.c == 0.0, json!({ "big_pi_sq": zero.big_pi_sq, "b": zero.b, "c": zero.c }));
    Ok(report)
}
