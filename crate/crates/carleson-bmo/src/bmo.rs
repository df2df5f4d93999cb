//! Weighted BMO norms of matrix symbols.
//!
//! All variants report the supremum over cubes of the averaged `p`-th power
//! (no root is taken), so `B = b·Id`, `W = Id`, `p = 2` gives the square of the
//! dyadic BMO norm of `b`.

use dyadic_core::covering::{overlap_measure, shifted_cubes_meeting_unit, RationalCube, Q};
use dyadic_core::{Cube, Grid, StepFunction};
use nalgebra::DMatrix;
use operators::MatrixSymbol;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use weights::linalg::{op_norm, spd_sqrt};
use weights::{conjugate, reducing_table, LeafWeights, MatrixWeight, ReducingOptions, ReducingTable};

use crate::carleson::{inverse, SupReport};
use crate::error::CarlesonError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BmoVariant {
    /// `|I|^{-1} ∫_I ‖W^{1/p}(B − m_I B) V_I^{-1}‖^p`.
    Primal,
    /// `|I|^{-1} ∫_I ‖W^{-1/p}(B* − m_I B*) (V_I′)^{-1}‖^{p′}`.
    Dual,
    /// The dyadic class: primal for `p ≥ 2`, dual for `p < 2`.
    DyadicGridRestricted,
    /// Largest entrywise `|I|^{-1} ∫_I |b_ij − m_I b_ij|²`.
    Unweighted,
}

fn mat(slice: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, slice)
}

/// Per-cube averages of `‖L(x)(B(x) − m_I B) R_I‖^r`.
fn oscillation(b: &StepFunction, left: &StepFunction, right: &[DMatrix<f64>], r: f64) -> Vec<f64> {
    let g = b.grid();
    let n = (b.width() as f64).sqrt().round() as usize;
    let means = b.cube_means();
    (0..g.num_cubes())
        .into_par_iter()
        .map(|id| {
            let c = g.cube(id);
            let m = mat(&means[id * n * n..(id + 1) * n * n], n);
            let leaves = g.leaf_range(c);
            let count = leaves.len() as f64;
            let total: f64 = leaves.map(|j| op_norm(&(mat(left.leaf(j), n) * (mat(b.leaf(j), n) - &m) * &right[id])).powf(r)).sum();
            total / count
        })
        .collect()
}

fn inverses(table: &ReducingTable, dual: bool) -> Result<Vec<DMatrix<f64>>, CarlesonError> {
    let g = table.grid();
    g.all_cubes().map(|c| inverse(if dual { table.v_prime(c) } else { table.v(c) }, c)).collect()
}

fn unweighted(b: &StepFunction) -> Vec<f64> {
    let g = b.grid();
    let w = b.width();
    let means = b.cube_means();
    (0..g.num_cubes())
        .into_par_iter()
        .map(|id| {
            let leaves = g.leaf_range(g.cube(id));
            let count = leaves.len() as f64;
            (0..w)
                .map(|k| leaves.clone().map(|j| (b.leaf(j)[k] - means[id * w + k]).powi(2)).sum::<f64>() / count)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// BMO norm with the leaf weights and reducing operators supplied.
pub fn bmo_with(b: &MatrixSymbol, lw: &LeafWeights, table: &ReducingTable, variant: BmoVariant) -> Result<SupReport, CarlesonError> {
    let g = b.grid();
    if variant == BmoVariant::Unweighted {
        return Ok(SupReport::from_values(g, unweighted(b.function())));
    }
    g.check_same(lw.grid())?;
    g.check_same(table.grid())?;
    if lw.n() != b.n() || table.n() != b.n() {
        return Err(CarlesonError::InvalidInput("symbol and weight differ in size".into()));
    }
    let p = table.p();
    let dual = match variant {
        BmoVariant::Primal => false,
        BmoVariant::Dual => true,
        _ => p < 2.0,
    };
    let per_cube = if dual {
        oscillation(&b.function().transpose(), &lw.power_step(-1.0 / p), &inverses(table, true)?, conjugate(p))
    } else {
        oscillation(b.function(), &lw.power_step(1.0 / p), &inverses(table, false)?, p)
    };
    Ok(SupReport::from_values(g, per_cube))
}

/// BMO norm of `B` on its grid; the weight enters through its leaf-constant model.
pub fn bmo_norm(b: &MatrixSymbol, w: &MatrixWeight, p: f64, variant: BmoVariant) -> Result<SupReport, CarlesonError> {
    let g = b.grid();
    if variant == BmoVariant::Unweighted {
        return Ok(SupReport::from_values(g, unweighted(b.function())));
    }
    let lw = LeafWeights::new(w, g)?;
    let table = reducing_table(&lw.to_weight(), g, p, &ReducingOptions::default())?;
    bmo_with(b, &lw, &table, variant)
}

/// `|I|^{-1} ∫_I ‖W^{1/p}(B − A) V_I^{-1}‖^p` for a fixed matrix `A`.
pub fn oscillation_about(b: &MatrixSymbol, lw: &LeafWeights, table: &ReducingTable, c: Cube, a: &DMatrix<f64>) -> Result<f64, CarlesonError> {
    let g = b.grid();
    let n = b.n();
    let p = table.p();
    let vi = inverse(table.v(c), c)?;
    let leaves = g.leaf_range(c);
    let count = leaves.len() as f64;
    let total: f64 = leaves.map(|j| op_norm(&(lw.power(j, 1.0 / p) * (mat(b.function().leaf(j), n) - a) * &vi)).powf(p)).sum();
    Ok(total / count)
}

/// `p = 2` data of an arbitrary cube inside the base cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubeOscillation {
    /// `|R|^{-1} ∫_R ‖W^{1/2}(B − m_R B)(m_R W)^{-1/2}‖²`.
    pub oscillation: f64,
    /// `‖(m_R W)^{1/2}(m_R W^{-1})^{1/2}‖²`.
    pub a2: f64,
}

/// Leaves meeting the cube `lower + [0, side)^d`, with overlap measures.
fn leaves_meeting(g: &Grid, lower: &[f64], side: f64) -> Result<Vec<(usize, f64)>, CarlesonError> {
    let origin = g.origin();
    let tol = 1e-12;
    if lower.len() != g.d() || side <= 0.0 {
        return Err(CarlesonError::InvalidInput("cube has the wrong dimension or side".into()));
    }
    if lower.iter().zip(&origin).any(|(a, o)| *a < o - tol || a + side > o + 1.0 + tol) {
        return Err(CarlesonError::InvalidInput(format!("cube at {lower:?} with side {side} leaves the base cube")));
    }
    let k = 1u64 << g.depth();
    let h = g.side_at(g.depth() as u32);
    let ranges: Vec<(u64, u64)> = lower
        .iter()
        .zip(&origin)
        .map(|(a, o)| {
            let lo = (((a - o) / h).floor().max(0.0)) as u64;
            let hi = (((a + side - o) / h).ceil() as u64).min(k);
            (lo, hi.max(lo + 1))
        })
        .collect();
    let mut out = Vec::new();
    let mut idx: Vec<u64> = ranges.iter().map(|r| r.0).collect();
    let level = g.depth() as u32;
    loop {
        let leaf = g.from_offsets(level, &idx);
        let (ll, ls) = g.geometry(leaf);
        let ov = overlap_measure(lower, side, &ll, ls);
        if ov > 0.0 {
            out.push((leaf.code as usize, ov));
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < ranges[i].1 {
                break;
            }
            idx[i] = ranges[i].0;
            i += 1;
        }
    }
}

/// Exact `p = 2` oscillation over a cube that need not be dyadic.
pub fn cube_oscillation(b: &MatrixSymbol, lw: &LeafWeights, lower: &[f64], side: f64) -> Result<CubeOscillation, CarlesonError> {
    let g = b.grid();
    g.check_same(lw.grid())?;
    let n = b.n();
    let parts = leaves_meeting(g, lower, side)?;
    let total: f64 = parts.iter().map(|x| x.1).sum();
    let mut mb = DMatrix::zeros(n, n);
    let mut mw = DMatrix::zeros(n, n);
    let mut mwi = DMatrix::zeros(n, n);
    for &(j, ov) in &parts {
        mb += mat(b.function().leaf(j), n) * (ov / total);
        mw += lw.value(j) * (ov / total);
        mwi += lw.power(j, -1.0) * (ov / total);
    }
    let v = spd_sqrt(&mw);
    let vi = inverse(&v, g.root())?;
    let a2 = op_norm(&(&v * spd_sqrt(&mwi))).powi(2);
    let osc: f64 = parts.iter().map(|&(j, ov)| ov * op_norm(&(lw.power(j, 0.5) * (mat(b.function().leaf(j), n) - &mb) * &vi)).powi(2)).sum();
    Ok(CubeOscillation { oscillation: osc / total, a2 })
}

/// `p = 2` BMO over the cubes of the shifted family `D^t` that lie in the base cube.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftedBmo {
    pub t: u32,
    pub norm: f64,
    /// Largest `‖V V′‖²` over the same cubes.
    pub a2: f64,
    pub supremizing_cube: (Vec<f64>, f64),
    pub cubes: usize,
}

pub fn shifted_grid_bmo(b: &MatrixSymbol, lw: &LeafWeights, t: u32) -> Result<ShiftedBmo, CarlesonError> {
    let g = b.grid();
    let d = g.d();
    if t == 0 || t > 1 << d {
        return Err(CarlesonError::InvalidInput(format!("shift index {t} outside 1..={}", 1 << d)));
    }
    let unit = RationalCube::new(vec![Q::from_integer(0); d], Q::from_integer(1))?;
    let mut cubes = Vec::new();
    for level in 0..=g.depth() as u32 {
        for sc in shifted_cubes_meeting_unit(d, t, level) {
            let r = sc.as_rational();
            if unit.contains(&r) {
                cubes.push((r.lower_f64(), r.side_f64()));
            }
        }
    }
    let vals: Result<Vec<CubeOscillation>, CarlesonError> = cubes.par_iter().map(|(lo, s)| cube_oscillation(b, lw, lo, *s)).collect();
    let vals = vals?;
    let mut best = (0.0, 0);
    for (i, v) in vals.iter().enumerate() {
        if v.oscillation > best.0 {
            best = (v.oscillation, i);
        }
    }
    let a2 = vals.iter().map(|v| v.a2).fold(0.0, f64::max);
    Ok(ShiftedBmo { t, norm: best.0, a2, supremizing_cube: cubes[best.1].clone(), cubes: cubes.len() })
}

/// Constant in `osc(R) ≤ C osc(I_t)` for `R ⊆ I_t`, `ℓ(I_t) ≤ 6ℓ(R)` at `p = 2`.
///
/// Oscillation about `m_{I_t} B` loses `(1 + n A^{1/2})²`; moving from `V_R` to
/// `V_{I_t}` costs `‖V_{I_t} V_R^{-1}‖² ≤ A |I_t|/|R|`, and enlarging the domain
/// another `|I_t|/|R|`.
pub fn comparability_constant(n: usize, d: usize, a2: f64) -> f64 {
    (1.0 + n as f64 * a2.sqrt()).powi(2) * a2 * 36f64.powi(d as i32)
}
