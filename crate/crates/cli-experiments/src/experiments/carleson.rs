//! Carleson conditions (b) and (c), the scalar Carleson lemma, the NTV forms
//! and the `p = 2` embedding.

use carleson_bmo::{carleson_embedding_p2, carleson_report, ntv_scalar_equivalence, EmbeddingCheck};
use dyadic_core::{carleson_lemma, CarlesonLemmaSides, Signature};
use nalgebra::DMatrix;
use operators::{weighted_operator_norm, BigPi, MatrixSequence, NormOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use weights::linalg::op_norm;
use weights::{reducing_table, LeafWeights, MatrixWeight, ReducingOptions, ReducingTable};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};
use crate::symbols::random_sequence;

/// Declared cap on `embedding / (C A₂³)`.
pub const EMBEDDING_CAP: f64 = 4.0;

/// `λ_I = Σ_ε ‖V_I A_I^ε V_I^{-1}‖²`, zero on leaves.
pub fn conjugated_sequence(a: &MatrixSequence, table: &ReducingTable) -> Result<Vec<f64>, CliError> {
    let g = a.grid();
    let mut out = vec![0.0; g.num_cubes()];
    for c in g.interior_cubes() {
        let v = table.v(c);
        let vi = v.clone().try_inverse().ok_or_else(|| CliError::Config(format!("singular reducing operator on {c:?}")))?;
        out[g.id(c)] = Signature::cancellative(g.d()).map(|e| op_norm(&(v * a.get(c, e) * &vi)).powi(2)).sum();
    }
    Ok(out)
}

/// Carleson lemma with `λ` from [`conjugated_sequence`] and random `a_I ≥ 0`.
pub fn lemma_sides(a: &MatrixSequence, table: &ReducingTable, seed: u64) -> Result<CarlesonLemmaSides, CliError> {
    let g = a.grid();
    let lambda = conjugated_sequence(a, table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..g.num_cubes()).map(|_| rng.random_range(0.0..3.0)).collect();
    Ok(carleson_lemma(g, &lambda, &weights))
}

/// Slack of `C ∫_J W − Σ_{I ⊆ J, ε} (A_I^ε)ᵀ A_I^ε` on the premise cube at
/// `C = premise·(1 ± δ)`: nonnegative above, negative below.
pub fn premise_slack(a: &MatrixSequence, lw: &LeafWeights, e: &EmbeddingCheck, delta: f64) -> (f64, f64) {
    let g = a.grid();
    let n = a.n();
    let j = e.premise_cube;
    let mut s = DMatrix::zeros(n, n);
    for i in g.interior_cubes().filter(|i| g.contains(j, *i)) {
        for eps in Signature::cancellative(g.d()) {
            let ai = a.get(i, eps);
            s += ai.transpose() * ai;
        }
    }
    let mass: DMatrix<f64> = lw.all_means(1.0)[g.id(j)].clone() * g.measure_at(j.level);
    let slack = |c: f64| (mass.clone() * c - &s).symmetric_eigenvalues().min();
    (slack(e.premise * (1.0 + delta)), slack(e.premise * (1.0 - delta)))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let w = cfg.weight_or(MatrixWeight::RandomSpd { seed: cfg.seed, cond: 50.0, n: 2 });
    let g = cfg.grid_or(1, 6)?;
    let p = cfg.p_or(2.0);
    let lw = LeafWeights::new(&w, &g)?;
    let table = reducing_table(&lw.to_weight(), &g, p, &ReducingOptions::default())?;
    let a = random_sequence(&g, w.n(), cfg.density.unwrap_or(0.5).clamp(0.0, 1.0), cfg.seed);
    let rep = carleson_report(&a, &table)?;
    let mut report = Report::new("carleson", &cfg.id);
    report.set("p", json!(p));

    let mut t = Table::new("carleson", &[("quantity", "name"), ("value", "value")]);
    t.push(vec!["condition_b".into(), rep.b.norm.into()]);
    t.push(vec!["condition_c".into(), rep.c.constant().norm.into()]);
    t.push(vec!["characteristic".into(), table.characteristic().0.into()]);

    let lambda = conjugated_sequence(&a, &table)?;
    let scalar: Vec<f64> = lambda.iter().map(|v| v.sqrt()).collect();
    let ntv = ntv_scalar_equivalence(&g, &scalar, p)?;
    t.push(vec!["ntv_sup_form".into(), ntv.sup_form.into()]);
    t.push(vec!["ntv_lp_form".into(), ntv.lp_form.into()]);
    if p == 2.0 {
        let rel = (ntv.ratio() - 1.0).abs();
        report.check("NTV forms coincide at p = 2", rel <= 1e-12, json!({ "sup_form": ntv.sup_form, "lp_form": ntv.lp_form }));
    }

    let sides = lemma_sides(&a, &table, cfg.seed ^ 0x5eed)?;
    report.check(
        "Carleson lemma: Σ a_I λ_I ≤ C ∫ a*",
        sides.holds(1e-12),
        json!({ "lhs": sides.lhs, "constant": sides.constant, "integral_of_maximal": sides.integral_of_maximal }),
    );

    if p == 2.0 {
        let no = NormOptions::default();
        let pi = weighted_operator_norm(&BigPi::new(&a, &table, &lw)?, None, 2.0, &no)?.value;
        let cc = rep.c.constant().norm;
        t.push(vec!["big_pi_norm_sq".into(), (pi * pi).into()]);
        report.check("C_c ≤ ‖Π_A‖²", cc <= pi * pi * (1.0 + 1e-9), json!({ "condition_c": cc, "big_pi_norm_sq": pi * pi }));

        let e = carleson_embedding_p2(&a, &lw, &no)?;
        let (above, below) = premise_slack(&a, &lw, &e, 1e-6);
        report.check("embedding premise holds at its constant and fails below it", above >= -1e-9 * e.premise && (e.premise == 0.0 || below < 0.0), json!({ "premise": e.premise, "slack_above": above, "slack_below": below }));
        report.check(
            format!("embedding constant over C·A₂³ at most {EMBEDDING_CAP}"),
            e.fitted() <= EMBEDDING_CAP,
            json!({ "fitted": e.fitted(), "embedding": e.embedding, "premise": e.premise, "a2": e.a2 }),
        );
        t.push(vec!["embedding".into(), e.embedding.into()]);
        t.push(vec!["embedding_fitted".into(), e.fitted().into()]);
    }
    report.tables.push(t);
    Ok(report)
}
