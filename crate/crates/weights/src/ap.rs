//! Matrix `A_p` characteristics.

use dyadic_core::{Cube, Grid};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::WeightError;
use crate::linalg::{op_norm, op_norm_2x2};
use crate::reducing::{reducing_table, ReducingOptions, ReducingTable};
use crate::weight::{conjugate, LeafWeights, MatrixWeight};

/// Largest leaf count for which the double average is summed over all pairs.
pub const DOUBLE_AVERAGE_LEAF_CAP: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApRow {
    pub level: u32,
    pub offsets: Vec<u64>,
    /// `‖V_I V_I′‖^p`.
    pub reducing: f64,
    /// `m_I,x (m_I,t ‖W^{1/p}(x) W^{−1/p}(t)‖^{p′})^{p/p′}`.
    pub double_average: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApReport {
    pub p: f64,
    /// `sup_I ‖V_I V_I′‖^p`, the value every bound is stated in.
    pub primary: f64,
    pub primary_cube: Cube,
    /// Supremum of the double average, when it was evaluated.
    pub defining: Option<f64>,
    pub defining_cube: Option<Cube>,
    pub rows: Vec<ApRow>,
}

impl ApReport {
    pub fn a2(&self) -> f64 {
        self.primary
    }
}

/// Double averages on every cube at once.
///
/// For each leaf `x` the inner sum over `t` is bucketed by the level of the
/// smallest common ancestor, so all cubes containing `x` are served by one
/// pass over the leaves.
pub fn double_averages(lw: &LeafWeights, p: f64) -> Vec<f64> {
    let g = lw.grid();
    let n = lw.n();
    let q = conjugate(p);
    let depth = g.depth();
    let d = g.d();
    let nl = g.num_leaves();
    let a: Vec<DMatrix<f64>> = (0..nl).into_par_iter().map(|j| lw.power(j, 1.0 / p)).collect();
    let b: Vec<DMatrix<f64>> = (0..nl).into_par_iter().map(|j| lw.power(j, -1.0 / p)).collect();
    // per leaf, per level k: (m_{I_k(x)} ‖A_x B_t‖^{q})^{p/q}
    let per_leaf: Vec<Vec<f64>> = (0..nl)
        .into_par_iter()
        .map(|x| {
            let mut bucket = vec![0.0; depth + 1];
            let ax = &a[x];
            for t in 0..nl {
                let norm = if n == 2 {
                    let bt = &b[t];
                    op_norm_2x2(
                        ax[(0, 0)] * bt[(0, 0)] + ax[(0, 1)] * bt[(1, 0)],
                        ax[(0, 0)] * bt[(0, 1)] + ax[(0, 1)] * bt[(1, 1)],
                        ax[(1, 0)] * bt[(0, 0)] + ax[(1, 1)] * bt[(1, 0)],
                        ax[(1, 0)] * bt[(0, 1)] + ax[(1, 1)] * bt[(1, 1)],
                    )
                } else {
                    op_norm(&(ax * &b[t]))
                };
                let diff = (x ^ t) as u64;
                let bits = 64 - diff.leading_zeros() as usize;
                let level = depth - bits.div_ceil(d);
                bucket[level] += norm.powf(q);
            }
            let mut out = vec![0.0; depth + 1];
            let mut acc = 0.0;
            for k in (0..=depth).rev() {
                acc += bucket[k];
                let count = (g.branching() as f64).powi((depth - k) as i32);
                out[k] = (acc / count).powf(p / q);
            }
            out
        })
        .collect();
    let mut sums = vec![0.0; g.num_cubes()];
    for (x, vals) in per_leaf.iter().enumerate() {
        for c in g.chain(x) {
            sums[g.id(c)] += vals[c.level as usize];
        }
    }
    g.all_cubes().map(|c| sums[g.id(c)] / g.leaf_range(c).len() as f64).collect()
}

/// Both characteristics over every cube of `grid`.
pub fn ap_characteristic(w: &MatrixWeight, p: f64, grid: &Grid) -> Result<ApReport, WeightError> {
    let table = reducing_table(w, grid, p, &ReducingOptions::default())?;
    ap_from_table(w, &table)
}

/// Same as [`ap_characteristic`] reusing a computed table.
pub fn ap_from_table(w: &MatrixWeight, table: &ReducingTable) -> Result<ApReport, WeightError> {
    let grid = table.grid();
    let p = table.p();
    let double = if grid.num_leaves() <= DOUBLE_AVERAGE_LEAF_CAP {
        Some(double_averages(&LeafWeights::new(w, grid)?, p))
    } else {
        None
    };
    let (primary, primary_cube) = table.characteristic();
    let mut defining: Option<(f64, Cube)> = None;
    let rows = grid
        .all_cubes()
        .map(|c| {
            let da = double.as_ref().map(|v| v[grid.id(c)]);
            if let Some(v) = da {
                if defining.is_none_or(|(b, _)| v > b) {
                    defining = Some((v, c));
                }
            }
            ApRow { level: c.level, offsets: grid.offsets(c), reducing: table.pair(c).product_norm().powf(p), double_average: da }
        })
        .collect();
    Ok(ApReport { p, primary, primary_cube, defining: defining.map(|x| x.0), defining_cube: defining.map(|x| x.1), rows })
}
