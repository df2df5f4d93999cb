//! Weak type of `M_W′`, the pointwise chain for `M_W` and the local function `N_Q`.

use dyadic_core::{Grid, StepFunction};
use maximal_sparse::{local_nq_with, maximal_prime_p2, mw_proof_chain, weak_type_22};
use serde_json::json;
use weights::linalg::{op_norm, spd_sqrt};
use weights::{LeafWeights, MatrixWeight};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};
use crate::symbols::random_vector;

/// Condition number of the default random weights, far outside `A₂`.
pub const WILD_CONDITION: f64 = 1e8;

/// `max_v v²|{M′f ≥ v}| / ‖f‖²` by counting leaves for each attained `v`.
pub fn weak_type_by_count(lw: &LeafWeights, f: &StepFunction) -> Result<f64, CliError> {
    let m = maximal_prime_p2(lw, f, false)?;
    let h = lw.grid().leaf_measure();
    let norm = f.norm_sq();
    Ok(m.data().iter().map(|v| v * v * m.data().iter().filter(|u| *u >= v).count() as f64 * h / norm).fold(0.0, f64::max))
}

fn sample_weight(cfg: &ExperimentConfig, k: usize) -> MatrixWeight {
    cfg.weight.clone().unwrap_or(MatrixWeight::RandomSpd { seed: cfg.seed.wrapping_add(k as u64), cond: WILD_CONDITION, n: 2 + k % 2 })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let g: Grid = cfg.grid_or(1, 8)?;
    let samples = cfg.samples.unwrap_or(10).max(1);
    let mut report = Report::new("maximal", &cfg.id);
    let mut t = Table::new(
        "weak-type",
        &[
            ("sample", "index"),
            ("n", "dimension"),
            ("constant", "max_λ λ²|{M′f > λ}| / ‖f‖²"),
            ("by_count", "the same ratio recounted leaf by leaf"),
            ("levels", "attained values of M′f"),
        ],
    );
    let (mut violations, mut mismatch, mut worst) = (0usize, 0.0f64, 0.0f64);
    for k in 0..samples {
        let w = sample_weight(cfg, k);
        let lw = LeafWeights::new(&w, &g)?;
        let f = random_vector(&g, w.n(), cfg.seed.wrapping_add(1000 + k as u64));
        let rep = weak_type_22(&lw, &f)?;
        let count = weak_type_by_count(&lw, &f)?;
        if !rep.holds(1e-12) {
            violations += 1;
        }
        mismatch = mismatch.max((count - rep.constant).abs() / count.max(1.0));
        worst = worst.max(rep.constant / rep.bound);
        t.push(vec![k.into(), w.n().into(), rep.constant.into(), count.into(), rep.levels.into()]);
    }
    report.tables.push(t);
    report.check("λ²|{M′f > λ}| ≤ n‖f‖² on every sample", violations == 0, json!({ "samples": samples, "violations": violations, "largest_ratio_to_n": worst }));
    report.check("exhaustive threshold scan matches a direct recount", mismatch <= 1e-12, json!({ "largest_relative_deviation": mismatch }));

    let w = cfg.weight_or(MatrixWeight::counterexample(0.5));
    let lw = LeafWeights::new(&w, &g)?;
    let f = random_vector(&g, w.n(), cfg.seed);
    let chain = mw_proof_chain(&lw, &f)?;
    let v = chain.violations(1e-12);
    report.check("M_W f(x) ≤ 8·2^{j+1}·N_S(x) with every intermediate step", v.total() == 0, json!({ "violations": v, "achieved_constant": chain.achieved_constant }));
    report.set("achieved_constant", json!(chain.achieved_constant));

    let nq = local_nq_with(&lw, g.root());
    let a2 = lw.all_means(1.0).iter().zip(lw.all_means(-1.0)).map(|(m, mi)| op_norm(&(spd_sqrt(m) * spd_sqrt(&mi))).powi(2)).fold(0.0, f64::max);
    report.set("nq_average", json!(nq.average));
    report.set("a2", json!(a2));
    report.set("nq_fitted_constant", json!(nq.average / a2));
    Ok(report)
}
