//! Weighted BMO variants, the shifted dyadic families and the covering lemma.

use carleson_bmo::{bmo_with, comparability_constant, cube_oscillation, shifted_grid_bmo, BmoVariant, ShiftedBmo};
use dyadic_core::covering::Q;
use dyadic_core::{find_covering_cube, RationalCube};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use weights::{reducing_table, LeafWeights, MatrixWeight, ReducingOptions};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Report, Table};
use crate::symbols::symbol;

/// Denominator of the random interval endpoints.
const DENOMINATOR: i128 = 1 << 40;

/// Outcome of covering `count` random cubes of `[0, 1)^d` by shifted dyadic cubes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringSummary {
    pub count: usize,
    pub failures: usize,
    /// Largest `ℓ(I_t) / ℓ(I)`.
    pub worst_ratio: f64,
}

pub fn covering_trials(d: usize, count: usize, seed: u64) -> Result<CoveringSummary, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let six = Q::from_integer(6);
    let mut out = CoveringSummary { count, failures: 0, worst_ratio: 0.0 };
    for _ in 0..count {
        let len = rng.random_range(1..=DENOMINATOR);
        let lower: Vec<Q> = (0..d).map(|_| Q::new(rng.random_range(0..=DENOMINATOR - len), DENOMINATOR)).collect();
        let cube = RationalCube::new(lower, Q::new(len, DENOMINATOR))?;
        match find_covering_cube(&cube) {
            Ok((t, c)) => {
                let ok = (1..=1u32 << d).contains(&t) && c.as_rational().contains(&cube) && c.side() <= six * cube.side;
                if !ok {
                    out.failures += 1;
                }
                let ratio = c.side() / cube.side;
                out.worst_ratio = out.worst_ratio.max(*ratio.numer() as f64 / *ratio.denom() as f64);
            }
            Err(_) => out.failures += 1,
        }
    }
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let w = cfg.weight_or(MatrixWeight::counterexample(0.5));
    let g = cfg.grid_or(1, 6)?;
    let p = cfg.p_or(2.0);
    let b = symbol(cfg.symbol.as_deref().unwrap_or("random"), &g, w.n(), cfg.seed)?;
    let lw = LeafWeights::new(&w, &g)?;
    let table = reducing_table(&lw.to_weight(), &g, p, &ReducingOptions::default())?;
    let mut report = Report::new("bmo", &cfg.id);
    report.set("p", json!(p));

    let mut t = Table::new(
        "bmo",
        &[("variant", "primal, dual, dyadic-grid-restricted or unweighted"), ("norm", "p-th power average (p′ for the dual form)"), ("level", "level of the supremizing cube"), ("offsets", "offsets of the supremizing cube")],
    );
    let mut norms = Vec::new();
    for (name, v) in [("primal", BmoVariant::Primal), ("dual", BmoVariant::Dual), ("dyadic-grid-restricted", BmoVariant::DyadicGridRestricted), ("unweighted", BmoVariant::Unweighted)] {
        let r = bmo_with(&b, &lw, &table, v)?;
        let offs = g.offsets(r.supremizing_cube).iter().map(|o| o.to_string()).collect::<Vec<_>>().join(":");
        t.push(vec![name.into(), r.norm.into(), r.supremizing_cube.level.into(), offs.into()]);
        norms.push(r.norm);
    }
    report.tables.push(t);
    let expected = if p < 2.0 { norms[1] } else { norms[0] };
    report.check("grid-restricted variant picks the form for p", norms[2] == expected, json!({ "restricted": norms[2], "expected": expected }));

    let samples = cfg.samples.unwrap_or(1000);
    if p == 2.0 && g.shift().pattern() == 0 {
        let fams: Vec<ShiftedBmo> = (1..=(1u32 << g.d())).map(|t| shifted_grid_bmo(&b, &lw, t)).collect::<Result<_, _>>()?;
        let standard = &fams[0];
        let rel = (standard.norm - norms[0]).abs() / norms[0].max(f64::MIN_POSITIVE);
        report.check(
            "standard shifted family reproduces the dyadic norm",
            standard.cubes == g.num_cubes() && rel <= 1e-10,
            json!({ "shifted": standard.norm, "dyadic": norms[0], "relative_deviation": rel }),
        );
        let best = fams.iter().map(|f| f.norm).fold(0.0, f64::max);
        let a_fam = fams.iter().map(|f| f.a2).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (mut violations, mut worst) = (0usize, 0.0f64);
        let trials = samples.min(1000);
        for _ in 0..trials {
            let side = rng.random_range(0.01..0.5);
            let lower: Vec<f64> = (0..g.d()).map(|_| rng.random_range(0.0..1.0 - side)).collect();
            let r = cube_oscillation(&b, &lw, &lower, side)?;
            let c = comparability_constant(w.n(), g.d(), a_fam.max(r.a2));
            if r.oscillation > c * best {
                violations += 1;
            }
            if best > 0.0 {
                worst = worst.max(r.oscillation / (c * best));
            }
        }
        report.check("arbitrary cubes controlled by the shifted families", violations == 0, json!({ "trials": trials, "violations": violations, "largest_ratio_to_bound": worst }));
        report.set("shifted_norms", json!(fams.iter().map(|f| f.norm).collect::<Vec<_>>()));
    }

    let cov = covering_trials(g.d(), samples, cfg.seed)?;
    report.check("every random cube has a shifted cover with ℓ(I_t) ≤ 6ℓ(I)", cov.failures == 0, json!({ "count": cov.count, "failures": cov.failures, "worst_ratio": cov.worst_ratio }));
    Ok(report)
}
