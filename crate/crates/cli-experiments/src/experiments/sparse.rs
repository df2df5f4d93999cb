//! A generated sparse family: certificate, the displayed chain and `‖S‖`.

use maximal_sparse::{sparse_chain, sparse_generate, SparseOperator};
use operators::{weighted_operator_norm, NormOptions};
use serde_json::json;
use weights::{LeafWeights, MatrixWeight};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};
use crate::symbols::random_vector;

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let g = cfg.grid_or(1, 10)?;
    let density = cfg.density.unwrap_or(0.5);
    let w = cfg.weight_or(MatrixWeight::counterexample(0.5));
    let samples = cfg.samples.unwrap_or(10).max(1);
    let fam = sparse_generate(&g, cfg.seed, density)?;
    let mut report = Report::new("sparse", &cfg.id);
    report.set("density", json!(density));
    report.set("members", json!(fam.len()));

    let cert = fam.certificate();
    let short = fam.cubes().into_iter().filter(|c| 2.0 * fam.exceptional_measure(*c) < g.measure_at(c.level)).count();
    report.check(
        "sparse certificate with disjoint E_I and 2|E_I| ≥ |I|",
        cert.sparse && cert.exceptional_disjoint && fam.exceptional_overlap() == 1 && short == 0,
        json!({ "certificate": cert, "overlap": fam.exceptional_overlap(), "short_cubes": short }),
    );
    report.attachments.push(("family.json".into(), serde_json::to_string_pretty(&fam.to_cubes()).expect("serializable") + "\n"));

    let lw = LeafWeights::new(&w, &g)?;
    let mut t = Table::new(
        "sparse-chain",
        &[
            ("sample", "index"),
            ("pairing", "|⟨W^{1/2}S(W^{-1/2}f), g⟩|"),
            ("moved", "|⟨S(W^{-1/2}f), W^{1/2}g⟩|"),
            ("termwise", "Σ |I||⟨m_I(W^{-1/2}f), m_I(W^{1/2}g)⟩|"),
            ("reduced", "A₂^{1/2} Σ |I| Y_I Z_I"),
            ("exceptional", "2A₂^{1/2} Σ |E_I| Y_I Z_I"),
            ("maximal", "2A₂^{1/2} Σ ∫_{E_I} M′f M′g"),
            ("cauchy_schwarz", "2A₂^{1/2} ‖M′f‖‖M′g‖"),
        ],
    );
    let mut broken = Vec::new();
    let mut a2 = 1.0;
    for k in 0..samples {
        let f = random_vector(&g, w.n(), cfg.seed.wrapping_add(2 * k as u64 + 1));
        let h = random_vector(&g, w.n(), cfg.seed.wrapping_add(2 * k as u64 + 2));
        let c = sparse_chain(&fam, &lw, &f, &h)?;
        a2 = c.a2;
        if !c.holds(1e-10) {
            broken.push(k);
        }
        t.push(vec![k.into(), c.pairing.into(), c.moved.into(), c.termwise.into(), c.reduced.into(), c.exceptional.into(), c.maximal.into(), c.cauchy_schwarz.into()]);
    }
    report.tables.push(t);
    report.check("every link of the chain holds with constants 1, A₂^{1/2}, 2", broken.is_empty(), json!({ "samples": samples, "broken": broken }));

    let norm = weighted_operator_norm(&SparseOperator::new(fam, w.n())?, Some(&lw), 2.0, &NormOptions::default())?.value;
    report.set("a2", json!(a2));
    report.set("norm", json!(norm));
    report.set("fitted_constant", json!(norm / a2.powf(1.5)));
    Ok(report)
}
