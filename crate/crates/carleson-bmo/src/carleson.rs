//! Carleson conditions for a matrix sequence `{A_I^ε}` against a weight.
//!
//! Condition (b) is the scalar Carleson norm of `‖V_I A_I^ε V_I^{-1}‖²`;
//! condition (c) is the smallest `C` with
//! `|J|^{-1} Σ_{I ⊆ J} (A_I^ε)* V_I² A_I^ε ≤ C V_J²`, a generalized eigenvalue
//! problem on every cube.

use dyadic_core::{subtree_sums, Cube, Grid, Signature};
use nalgebra::DMatrix;
use operators::MatrixSequence;
use rayon::prelude::*;
use serde::Serialize;
use weights::linalg::{op_norm, symmetrize};
use weights::{reducing_table, MatrixWeight, ReducingOptions, ReducingTable};

use crate::error::CarlesonError;

/// A supremum over grid cubes together with every per-cube value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupReport {
    pub norm: f64,
    pub supremizing_cube: Cube,
    /// Indexed by cube id.
    pub per_cube: Vec<f64>,
}

impl SupReport {
    pub(crate) fn from_values(grid: &Grid, per_cube: Vec<f64>) -> Self {
        let mut best = (0.0, 0);
        for (id, &v) in per_cube.iter().enumerate() {
            if v > best.0 {
                best = (v, id);
            }
        }
        SupReport { norm: best.0, supremizing_cube: grid.cube(best.1), per_cube }
    }
}

/// Condition (c): the primal form for `p ≥ 2`, the dual form for `p ≤ 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonC {
    pub primal: Option<SupReport>,
    pub dual: Option<SupReport>,
}

impl CarlesonC {
    /// The form that condition (c) uses at this exponent (primal at `p = 2`).
    pub fn constant(&self) -> &SupReport {
        self.primal.as_ref().or(self.dual.as_ref()).expect("one form is always computed")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub p: f64,
    pub b: SupReport,
    pub c: CarlesonC,
}

fn check(a: &MatrixSequence, table: &ReducingTable) -> Result<(), CarlesonError> {
    a.grid().check_same(table.grid())?;
    if a.n() != table.n() {
        return Err(CarlesonError::InvalidInput(format!("sequence of {0}×{0} matrices against a weight of size {1}", a.n(), table.n())));
    }
    Ok(())
}

pub(crate) fn inverse(m: &DMatrix<f64>, c: Cube) -> Result<DMatrix<f64>, CarlesonError> {
    match m.clone().try_inverse() {
        Some(inv) if inv.iter().all(|x| x.is_finite()) => Ok(inv),
        _ => Err(CarlesonError::Singular(c)),
    }
}

/// `Σ_{I ⊆ J} M_I` for every `J`, by cube id.
pub fn subtree_matrix_sums(grid: &Grid, per_cube: Vec<DMatrix<f64>>) -> Vec<DMatrix<f64>> {
    let mut s = per_cube;
    let b = grid.branching();
    for k in (0..grid.depth()).rev() {
        let child_start = grid.level_range(k + 1).start;
        for (local, id) in grid.level_range(k).enumerate() {
            for j in 0..b {
                let child = s[child_start + local * b + j].clone();
                s[id] += child;
            }
        }
    }
    s
}

/// `‖A‖_* = sup_J |J|^{-1} Σ_{I ⊆ J, ε} ‖V_I A_I^ε V_I^{-1}‖²`.
pub fn carleson_b_from_table(a: &MatrixSequence, table: &ReducingTable) -> Result<SupReport, CarlesonError> {
    check(a, table)?;
    let g = a.grid();
    let sigs: Vec<Signature> = Signature::cancellative(g.d()).collect();
    let terms: Result<Vec<f64>, CarlesonError> = (0..g.num_cubes())
        .into_par_iter()
        .map(|id| {
            let c = g.cube(id);
            if g.is_leaf(c) {
                return Ok(0.0);
            }
            let v = table.v(c);
            let vi = inverse(v, c)?;
            Ok(sigs.iter().map(|e| op_norm(&(v * a.get(c, *e) * &vi)).powi(2)).sum())
        })
        .collect();
    let sums = subtree_sums(g, &terms?);
    let per_cube = sums.iter().enumerate().map(|(id, s)| s / g.measure_at(g.cube(id).level)).collect();
    Ok(SupReport::from_values(g, per_cube))
}

fn condition_c(a: &MatrixSequence, table: &ReducingTable, dual: bool) -> Result<SupReport, CarlesonError> {
    let g = a.grid();
    let n = a.n();
    let sigs: Vec<Signature> = Signature::cancellative(g.d()).collect();
    let reducing = |c: Cube| if dual { table.v_prime(c) } else { table.v(c) };
    let terms: Vec<DMatrix<f64>> = (0..g.num_cubes())
        .into_par_iter()
        .map(|id| {
            let c = g.cube(id);
            let mut m = DMatrix::zeros(n, n);
            if g.is_leaf(c) {
                return m;
            }
            let v2 = reducing(c) * reducing(c);
            for e in &sigs {
                let ai = a.get(c, *e);
                if dual {
                    m += &ai * &v2 * ai.transpose();
                } else {
                    m += ai.transpose() * &v2 * &ai;
                }
            }
            m
        })
        .collect();
    let sums = subtree_matrix_sums(g, terms);
    let per_cube: Result<Vec<f64>, CarlesonError> = sums
        .par_iter()
        .enumerate()
        .map(|(id, s)| {
            let c = g.cube(id);
            let vi = inverse(reducing(c), c)?;
            Ok(op_norm(&symmetrize(&(&vi * s * &vi))) / g.measure_at(c.level))
        })
        .collect();
    Ok(SupReport::from_values(g, per_cube?))
}

/// Smallest constant in condition (c); both forms at `p = 2`.
pub fn carleson_c_from_table(a: &MatrixSequence, table: &ReducingTable) -> Result<CarlesonC, CarlesonError> {
    check(a, table)?;
    let p = table.p();
    let primal = if p >= 2.0 { Some(condition_c(a, table, false)?) } else { None };
    let dual = if p <= 2.0 { Some(condition_c(a, table, true)?) } else { None };
    Ok(CarlesonC { primal, dual })
}

pub fn carleson_report(a: &MatrixSequence, table: &ReducingTable) -> Result<CarlesonReport, CarlesonError> {
    Ok(CarlesonReport { p: table.p(), b: carleson_b_from_table(a, table)?, c: carleson_c_from_table(a, table)? })
}

pub fn carleson_b_sup(a: &MatrixSequence, w: &MatrixWeight, p: f64) -> Result<SupReport, CarlesonError> {
    let table = reducing_table(w, a.grid(), p, &ReducingOptions::default())?;
    carleson_b_from_table(a, &table)
}

pub fn carleson_c_constant(a: &MatrixSequence, w: &MatrixWeight, p: f64) -> Result<CarlesonC, CarlesonError> {
    let table = reducing_table(w, a.grid(), p, &ReducingOptions::default())?;
    carleson_c_from_table(a, &table)
}
