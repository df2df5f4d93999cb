//! The `p = 2` embedding: if `Σ_{I ⊆ J} (A_I^ε)* A_I^ε ≤ C ∫_J W` for every
//! `J`, then `Σ |A_I^ε m_I f|² ≲ C A₂³ ‖f‖²_{L²(W)}`.
//!
//! The premise constant is a generalized eigenvalue per cube; the best
//! constant of the conclusion is `‖f ↦ π_A(W^{-1/2} f)‖²` on `L²`, computed by
//! a dense singular value decomposition.

use dyadic_core::{Cube, Grid, Signature, StepFunction};
use nalgebra::DMatrix;
use operators::{conjugated_matrix, paraproduct_with, top_singular, LinearOperator, MatrixSequence, NormOptions, OperatorError};
use rayon::prelude::*;
use serde::Serialize;
use weights::linalg::{op_norm, spd_pow, spd_sqrt, symmetrize};
use weights::LeafWeights;

use crate::carleson::subtree_matrix_sums;
use crate::error::CarlesonError;

/// `g ↦ π_A(W^{-1/2} g)`.
struct Embedding {
    a: MatrixSequence,
    w_inv_half: StepFunction,
}

impl LinearOperator for Embedding {
    fn grid(&self) -> &Grid {
        self.a.grid()
    }
    fn n(&self) -> usize {
        self.a.n()
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        paraproduct_with(&self.a, &self.w_inv_half.apply(f)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    /// Smallest `C` in the premise.
    pub premise: f64,
    pub premise_cube: Cube,
    /// `sup_I ‖(m_I W)^{1/2}(m_I W^{-1})^{1/2}‖²` over the grid.
    pub a2: f64,
    /// `sup_f Σ |A_I^ε m_I f|² / ‖f‖²_{L²(W)}`.
    pub embedding: f64,
}

impl EmbeddingCheck {
    /// `embedding / (C A₂³)`.
    pub fn fitted(&self) -> f64 {
        if self.embedding == 0.0 {
            0.0
        } else {
            self.embedding / (self.premise * self.a2.powi(3))
        }
    }

    /// `embedding / (C^{1/2} A₂³)`; not invariant under `A ↦ tA`.
    pub fn fitted_root(&self) -> f64 {
        if self.embedding == 0.0 {
            0.0
        } else {
            self.embedding / (self.premise.sqrt() * self.a2.powi(3))
        }
    }
}

pub fn carleson_embedding_p2(a: &MatrixSequence, lw: &LeafWeights, opts: &NormOptions) -> Result<EmbeddingCheck, CarlesonError> {
    let g = a.grid();
    g.check_same(lw.grid())?;
    let n = a.n();
    if lw.n() != n {
        return Err(CarlesonError::InvalidInput("sequence and weight differ in size".into()));
    }
    let sigs: Vec<Signature> = Signature::cancellative(g.d()).collect();
    let terms: Vec<DMatrix<f64>> = (0..g.num_cubes())
        .into_par_iter()
        .map(|id| {
            let c = g.cube(id);
            let mut m = DMatrix::zeros(n, n);
            if !g.is_leaf(c) {
                for e in &sigs {
                    let ai = a.get(c, *e);
                    m += ai.transpose() * &ai;
                }
            }
            m
        })
        .collect();
    let sums = subtree_matrix_sums(g, terms);
    let means = lw.all_means(1.0);
    let means_inv = lw.all_means(-1.0);
    let per_cube: Vec<(f64, f64)> = (0..g.num_cubes())
        .into_par_iter()
        .map(|id| {
            let c = g.cube(id);
            let mass = &means[id] * g.measure_at(c.level);
            let s = spd_pow(&mass, -0.5);
            let premise = op_norm(&symmetrize(&(&s * &sums[id] * &s)));
            let a2 = op_norm(&(spd_sqrt(&means[id]) * spd_sqrt(&means_inv[id]))).powi(2);
            (premise, a2)
        })
        .collect();
    let mut best = (0.0, 0);
    for (id, (c, _)) in per_cube.iter().enumerate() {
        if *c > best.0 {
            best = (*c, id);
        }
    }
    let a2 = per_cube.iter().map(|x| x.1).fold(0.0, f64::max);
    let op = Embedding { a: a.clone(), w_inv_half: lw.power_step(-0.5) };
    let m = conjugated_matrix(&op, None, 2.0, opts.cap)?;
    let (s, _) = top_singular(&m, opts);
    Ok(EmbeddingCheck { premise: best.0, premise_cube: g.cube(best.1), a2, embedding: s * s })
}
