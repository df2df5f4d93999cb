//! Stopping-time generations with runtime thresholds.

use carleson_bmo::{default_stopping_tree, stopping_constants};
use serde_json::json;
use weights::{reducing_table, MatrixWeight, ReducingOptions};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let w = cfg.weight_or(MatrixWeight::counterexample(0.9));
    let g = cfg.grid_or(1, 14)?;
    let p = cfg.p_or(2.0);
    let table = reducing_table(&w, &g, p, &ReducingOptions::default())?;
    let consts = stopping_constants(&table);
    let tree = default_stopping_tree(&table, g.root())?;
    let mut report = Report::new("stopping", &cfg.id);
    report.set("p", json!(p));
    report.set("constants", json!(consts));
    report.set("thresholds", json!(tree.thresholds));

    let mut t = Table::new("stopping", &[("j", "generation index"), ("cubes", "number of cubes in J^j"), ("measure", "|∪J^j| / |I|"), ("bound", "2^{-j}")]);
    let decay = tree.decay();
    for (gen, m) in tree.generations.iter().zip(&decay) {
        t.push(vec![gen.index.into(), gen.cubes.len().into(), (*m).into(), 2f64.powi(-(gen.index as i32)).into()]);
    }
    report.tables.push(t);

    report.check("|∪J^j| ≤ 2^{-j}|I| for every generation", tree.decay_holds(1e-12), json!({ "decay": decay }));
    report.check("each generation is pairwise disjoint", tree.disjoint(), json!({ "generations": tree.generations.len() }));
    let counts = tree.partition_counts();
    let bad = counts.iter().filter(|&&c| c != 1).count();
    report.check("the families F^j partition D(I)", bad == 0, json!({ "cubes": counts.len(), "miscounted": bad }));

    let mut buf = Vec::new();
    tree.write_ndjson(&mut buf)?;
    report.attachments.push(("stopping.ndjson".into(), String::from_utf8(buf).expect("json is utf-8")));
    Ok(report)
}
