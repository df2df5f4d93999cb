//! `A_p` characteristic and the reducing-operator calculus on every cube.

use dyadic_core::Grid;
use serde_json::json;
use weights::linalg::direction_net;
use weights::{ap_characteristic, reducing_table, MatrixWeight, ReducingOptions};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};

/// Directions sampled per cube.
pub const DIRECTIONS: usize = 64;

/// Extremes over all cubes and sampled directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calculus {
    /// `min |V_I′ V_I e|`.
    pub reverse_ap: f64,
    /// `min |V e| / ρ(e)` over primal and dual gauges.
    pub sandwich_low: f64,
    /// `max |V e| / ρ(e)` over primal and dual gauges.
    pub sandwich_high: f64,
    /// `max |m_I(W^{-1/p}) e| / |V_I′ e|`.
    pub ave_low: f64,
    /// `max |V_I′ e| / (A^{n/p} |m_I(W^{-1/p}) e|)`.
    pub ave_high: f64,
    /// `max det V_I′ / (A^{n/p} det m_I(W^{-1/p}))`.
    pub jensen: f64,
    pub characteristic: f64,
}

pub fn calculus(w: &MatrixWeight, g: &Grid, p: f64) -> Result<Calculus, CliError> {
    let t = reducing_table(w, g, p, &ReducingOptions::default())?;
    let nf = w.n() as f64;
    let (a, _) = t.characteristic();
    let dirs = direction_net(w.n(), DIRECTIONS);
    let mut out = Calculus {
        reverse_ap: f64::INFINITY,
        sandwich_low: f64::INFINITY,
        sandwich_high: 0.0,
        ave_low: 0.0,
        ave_high: 0.0,
        jensen: 0.0,
        characteristic: a,
    };
    for c in g.all_cubes() {
        let pr = t.pair(c);
        let m = if p == 2.0 { w.cell_average(g, c, -0.5)? } else { w.leaf_average(g, c, -1.0 / p)? };
        for e in &dirs {
            out.reverse_ap = out.reverse_ap.min((&pr.v_prime * (&pr.v * e)).norm());
            let vp = (&pr.v_prime * e).norm();
            let me = (&m * e).norm();
            out.ave_low = out.ave_low.max(me / vp);
            out.ave_high = out.ave_high.max(vp / (a.powf(nf / p) * me));
        }
        out.sandwich_low = out.sandwich_low.min(pr.primal.lower.min(pr.dual.lower));
        out.sandwich_high = out.sandwich_high.max(pr.primal.upper.max(pr.dual.upper));
        out.jensen = out.jensen.max(pr.v_prime.determinant() / (a.powf(nf / p) * m.determinant()));
    }
    Ok(out)
}

/// `(reverse tolerance, upper sandwich bound, averaging tolerance)` at `p`.
pub fn tolerances(p: f64, n: usize) -> (f64, f64, f64) {
    if p == 2.0 {
        (1e-9, 1.0 + 1e-9, 1e-12)
    } else {
        (2e-3, (n as f64).sqrt() * (1.0 + 1e-3), 1e-3)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let w = cfg.weight_or(MatrixWeight::counterexample(0.5));
    let g = cfg.grid_or(1, 7)?;
    let p = cfg.p_or(2.0);
    let mut report = Report::new("apchar", &cfg.id);
    let ap = ap_characteristic(&w, p, &g)?;
    let mut t = Table::new(
        "apchar",
        &[
            ("level", "cube level"),
            ("offsets", "integer offsets joined by ':'"),
            ("reducing", "‖V_I V_I′‖^p"),
            ("double_average", "m_I,x (m_I,t ‖W^{1/p}(x) W^{-1/p}(t)‖^{p′})^{p/p′}; empty when not evaluated"),
        ],
    );
    for r in &ap.rows {
        let offs = r.offsets.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(":");
        t.push(vec![r.level.into(), offs.into(), r.reducing.into(), r.double_average.map(Into::into).unwrap_or("".into())]);
    }
    report.tables.push(t);
    report.set("p", json!(p));
    report.set("characteristic", json!(ap.primary));
    report.set("defining_characteristic", json!(ap.defining));

    let c = calculus(&w, &g, p)?;
    let (rev_tol, high, ave_tol) = tolerances(p, w.n());
    report.check("reverse A_p: |V′V e| ≥ |e|", c.reverse_ap >= 1.0 - rev_tol, json!({ "min": c.reverse_ap, "tolerance": rev_tol }));
    report.check(
        "John sandwich ρ ≤ |V e| ≤ √n ρ",
        c.sandwich_low >= 1.0 - 1e-9 && c.sandwich_high <= high,
        json!({ "lower": c.sandwich_low, "upper": c.sandwich_high, "upper_bound": high }),
    );
    report.check(
        "|m(W^{-1/p}) e| ≤ |V′ e| ≤ A^{n/p} |m(W^{-1/p}) e|",
        c.ave_low <= 1.0 + ave_tol && c.ave_high <= 1.0 + ave_tol,
        json!({ "lower_ratio": c.ave_low, "upper_ratio": c.ave_high, "tolerance": ave_tol }),
    );
    report.check("det V′ ≤ A^{n/p} det m(W^{-1/p})", c.jensen <= 1.0 + ave_tol, json!({ "ratio": c.jensen }));
    if let Some(def) = ap.defining {
        report.check("characteristic is finite and at least one", ap.primary >= (1.0 - rev_tol).powf(p) && def.is_finite(), json!({ "reducing": ap.primary, "defining": def }));
    }
    Ok(report)
}
