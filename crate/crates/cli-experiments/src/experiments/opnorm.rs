//! Weighted norm of one operator, with its witness re-evaluated.

use dyadic_core::{Grid, Shape, StepFunction};
use maximal_sparse::{sparse_generate, SparseOperator};
use operators::{
    weighted_operator_norm, AdjointParaproduct, BigPi, Commutator, CommutatorMode, HaarMultiplier, HaarShift, LinearOperator, NormKind, NormOptions, Paraproduct,
    ShiftMap,
};
use serde_json::json;
use weights::{reducing_table, LeafWeights, MatrixWeight, ReducingOptions};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};
use crate::symbols::{random_sequence, symbol};

pub const OPERATORS: [&str; 7] = ["paraproduct", "adjoint-paraproduct", "haar-multiplier", "shift", "commutator", "big-pi", "sparse"];

/// `‖f‖_{L^p(W)}` on the leaf model.
pub fn weighted_lp_norm(lw: &LeafWeights, f: &StepFunction, p: f64) -> Result<f64, CliError> {
    let wf = lw.power_step(1.0 / p).apply(f)?;
    let g = f.grid();
    let total: f64 = (0..g.num_leaves()).map(|j| wf.leaf(j).iter().map(|v| v * v).sum::<f64>().sqrt().powf(p)).sum();
    Ok((total * g.leaf_measure()).powf(1.0 / p))
}

fn build(name: &str, cfg: &ExperimentConfig, g: &Grid, lw: &LeafWeights, p: f64) -> Result<Box<dyn LinearOperator>, CliError> {
    let n = lw.n();
    let sym = || symbol(cfg.symbol.as_deref().unwrap_or("random"), g, n, cfg.seed);
    let sigma = || ShiftMap::named(g, cfg.shift.as_deref().unwrap_or("left-child"));
    Ok(match name {
        "paraproduct" => Box::new(Paraproduct(sym()?.coefficients().clone())),
        "adjoint-paraproduct" => Box::new(AdjointParaproduct(sym()?.coefficients().clone())),
        "haar-multiplier" => Box::new(HaarMultiplier(random_sequence(g, n, 0.5, cfg.seed))),
        "shift" => Box::new(HaarShift { sigma: sigma()?, n }),
        "commutator" => Box::new(Commutator { symbol: sym()?, sigma: sigma()?, mode: CommutatorMode::Direct }),
        "big-pi" => {
            let table = reducing_table(&lw.to_weight(), g, p, &ReducingOptions::default())?;
            Box::new(BigPi::new(&random_sequence(g, n, 0.5, cfg.seed), &table, lw)?)
        }
        "sparse" => Box::new(SparseOperator::new(sparse_generate(g, cfg.seed, cfg.density.unwrap_or(0.5))?, n)?),
        other => return Err(CliError::Config(format!("operator '{other}' is not one of {OPERATORS:?}"))),
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let name = cfg.operator.clone().unwrap_or_else(|| "paraproduct".into());
    let w = cfg.weight_or(MatrixWeight::counterexample(0.5));
    let g = cfg.grid_or(1, 6)?;
    let p = cfg.p_or(2.0);
    let lw = LeafWeights::new(&w, &g)?;
    let op = build(&name, cfg, &g, &lw, p)?;
    // Π_A carries W^{-1/p} inside and is measured on unweighted L^p
    let norm_weight = if name == "big-pi" { None } else { Some(&lw) };
    let r = weighted_operator_norm(op.as_ref(), norm_weight, p, &NormOptions::default())?;

    let mut report = Report::new("opnorm", &cfg.id);
    report.set("operator", json!(name));
    report.set("p", json!(p));
    report.set("value", json!(r.value));
    report.set("kind", json!(r.kind));
    let mut t = Table::new("opnorm", &[("operator", "operator name"), ("p", "exponent"), ("value", "weighted norm"), ("kind", "exact or lower-bound")]);
    t.push(vec![name.clone().into(), p.into(), r.value.into(), (if r.kind == NormKind::Exact { "exact" } else { "lower-bound" }).into()]);
    report.tables.push(t);

    let f = StepFunction::from_data(&g, Shape::Vector(lw.n()), r.witness.clone())?;
    let ident = LeafWeights::new(&MatrixWeight::identity(lw.n()), &g)?;
    let measure = norm_weight.unwrap_or(&ident);
    let achieved = weighted_lp_norm(measure, &op.apply(&f)?, p)? / weighted_lp_norm(measure, &f, p)?;
    let rel = if r.value > 0.0 { (achieved / r.value - 1.0).abs() } else { achieved };
    report.check("witness attains the reported value", rel <= 1e-6, json!({ "achieved": achieved, "reported": r.value, "relative_deviation": rel }));
    report.check("exact at p = 2 and a lower bound otherwise", (r.kind == NormKind::Exact) == (p == 2.0), json!({ "kind": r.kind }));
    Ok(report)
}
