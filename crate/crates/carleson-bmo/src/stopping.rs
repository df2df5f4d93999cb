//! The decaying stopping time built from reducing operators.
//!
//! `J(K)` is the set of maximal `J ⊊ K` with `‖V_J V_K^{-1}‖^p > λ₁` or
//! `‖V_J^{-1} V_K‖^{p′} > λ₂`; `F(K)` is everything in `D(K)` not below a
//! cube of `J(K)`. Iterating from the root gives generations `J^j` and the
//! partition `D(I) = ⊔_{j ≥ 1} F^j`.

use std::io::{self, Write};

use dyadic_core::{Cube, Grid};
use nalgebra::DMatrix;
use serde::Serialize;
use weights::linalg::op_norm;
use weights::{conjugate, ReducingOptions, ReducingTable};

use crate::carleson::inverse;
use crate::error::CarlesonError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Runtime constants of the decay argument.
///
/// With `u`, `u′` the global John factors (`1` at `p = 2`, `√n(1+η)` otherwise)
/// and `ℓ`, `ℓ′` the smallest certified lower ratios of the table,
/// `Σ_{J ∈ G} |J| ≤ λ₁^{-1} C₁ |I|` with `C₁ = (u/ℓ)^p n^{max(p/2,1)}` and
/// `Σ_{J ∈ G̃} |J| ≤ λ₂^{-1} C₂′ A^{p′/p} |I|` with
/// `C₂′ = (u′/(ℓ ℓ′²))^{p′} n^{max(p′/2,1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StoppingConstants {
    pub c1: f64,
    pub c2: f64,
    /// `sup_I ‖V_I V_I′‖^p` over the table.
    pub characteristic: f64,
}

impl StoppingConstants {
    /// `λ₁ = 4C₁`, `λ₂ = 4C₂′ A^{p′/p}`.
    pub fn thresholds(&self, p: f64) -> Thresholds {
        let q = conjugate(p);
        Thresholds { lambda1: 4.0 * self.c1, lambda2: 4.0 * self.c2 * self.characteristic.powf(q / p) }
    }
}

pub fn stopping_constants(table: &ReducingTable) -> StoppingConstants {
    let p = table.p();
    let q = conjugate(p);
    let n = table.n() as f64;
    let john = if p == 2.0 { 1.0 } else { n.sqrt() * (1.0 + ReducingOptions::default().eta) };
    let lower = table.pairs().iter().map(|r| r.primal.lower).fold(1.0, f64::min);
    let lower_d = table.pairs().iter().map(|r| r.dual.lower).fold(1.0, f64::min);
    let c1 = (john / lower).powf(p) * n.powf((p / 2.0).max(1.0));
    let c2 = (john / (lower * lower_d * lower_d)).powf(q) * n.powf((q / 2.0).max(1.0));
    StoppingConstants { c1, c2, characteristic: table.characteristic().0 }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generation {
    pub index: usize,
    pub cubes: Vec<Cube>,
    /// `|∪ J^j|`.
    pub measure: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StoppingTree {
    pub root: Cube,
    pub thresholds: Thresholds,
    /// `J^0 = {root}`, then `J^1, J^2, …` up to the first empty generation (excluded).
    pub generations: Vec<Generation>,
    /// For each cube id of `D(root)` the `j` with the cube in `F^j`; `None` elsewhere.
    pub family: Vec<Option<u32>>,
    #[serde(skip)]
    grid: Grid,
}

impl StoppingTree {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|∪J^j| / |I|` for `j = 0, 1, …`.
    pub fn decay(&self) -> Vec<f64> {
        let m = self.grid.measure_at(self.root.level);
        self.generations.iter().map(|g| g.measure / m).collect()
    }

    /// `|∪J^j| ≤ 2^{-j}|I|` for every generation, up to relative `tol`.
    pub fn decay_holds(&self, tol: f64) -> bool {
        self.decay().iter().enumerate().all(|(j, r)| *r <= 0.5f64.powi(j as i32) * (1.0 + tol))
    }

    /// Cubes within each generation are pairwise disjoint.
    pub fn disjoint(&self) -> bool {
        let g = &self.grid;
        let base = g.leaf_range(self.root).start;
        self.generations.iter().all(|gen| {
            let mut hit = vec![false; g.leaf_range(self.root).len()];
            for c in &gen.cubes {
                for j in g.leaf_range(*c) {
                    if std::mem::replace(&mut hit[j - base], true) {
                        return false;
                    }
                }
            }
            true
        })
    }

    /// For every cube of `D(root)`, the number of `j` with the cube in `F^j`,
    /// recomputed from the generation lists alone.
    pub fn partition_counts(&self) -> Vec<usize> {
        let g = &self.grid;
        let mut member: Vec<Vec<usize>> = vec![Vec::new(); g.num_cubes()];
        for gen in &self.generations {
            for c in &gen.cubes {
                member[g.id(*c)].push(gen.index);
            }
        }
        g.descendants(self.root)
            .map(|q| {
                // generations owning an ancestor-or-self of q
                let mut owners = Vec::new();
                let mut cur = Some(q);
                while let Some(c) = cur {
                    owners.extend(&member[g.id(c)]);
                    if c == self.root {
                        break;
                    }
                    cur = g.parent(c);
                }
                (1..=self.generations.len()).filter(|&j| owners.contains(&(j - 1)) && !owners.contains(&j)).count()
            })
            .collect()
    }

    /// One JSON object per generation.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> io::Result<()> {
        for gen in &self.generations {
            let cubes: Vec<serde_json::Value> = gen
                .cubes
                .iter()
                .map(|c| serde_json::json!({ "level": c.level, "offsets": self.grid.offsets(*c) }))
                .collect();
            let line = serde_json::json!({
                "generation": gen.index,
                "measure": gen.measure,
                "count": gen.cubes.len(),
                "cubes": cubes,
            });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

pub fn stopping_time_tree(table: &ReducingTable, root: Cube, th: Thresholds) -> Result<StoppingTree, CarlesonError> {
    for (name, value) in [("lambda1", th.lambda1), ("lambda2", th.lambda2)] {
        if !(value > 1.0) {
            return Err(CarlesonError::Threshold { name, value });
        }
    }
    let g = table.grid();
    let p = table.p();
    let q = conjugate(p);
    let inv: Vec<DMatrix<f64>> = g.all_cubes().map(|c| inverse(table.v(c), c)).collect::<Result<_, _>>()?;
    let stops = |j: Cube, k: Cube| {
        let (vj, vk) = (table.v(j), table.v(k));
        op_norm(&(vj * &inv[g.id(k)])).powf(p) > th.lambda1 || op_norm(&(&inv[g.id(j)] * vk)).powf(q) > th.lambda2
    };

    let mut family = vec![None; g.num_cubes()];
    let mut generations = vec![Generation { index: 0, cubes: vec![root], measure: g.measure_at(root.level) }];
    loop {
        let j = generations.len();
        let mut next = Vec::new();
        for &k in &generations[j - 1].cubes {
            family[g.id(k)] = Some(j as u32);
            let mut stack: Vec<Cube> = if g.is_leaf(k) { Vec::new() } else { g.children(k).collect() };
            while let Some(c) = stack.pop() {
                if stops(c, k) {
                    next.push(c);
                } else {
                    family[g.id(c)] = Some(j as u32);
                    if !g.is_leaf(c) {
                        stack.extend(g.children(c));
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by_key(|c| g.id(*c));
        let measure = next.iter().map(|c| g.measure_at(c.level)).sum();
        generations.push(Generation { index: j, cubes: next, measure });
    }
    Ok(StoppingTree { root, thresholds: th, generations, family, grid: g.clone() })
}

/// Tree with the runtime thresholds of [`stopping_constants`].
pub fn default_stopping_tree(table: &ReducingTable, root: Cube) -> Result<StoppingTree, CarlesonError> {
    let th = stopping_constants(table).thresholds(table.p());
    stopping_time_tree(table, root, th)
}
