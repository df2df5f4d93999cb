//! `Π_A f = Σ V_I A_I^ε m_I(W^{−1/p} f) h_I^ε`.

use dyadic_core::StepFunction;
use nalgebra::DMatrix;
use weights::{LeafWeights, ReducingTable};

use crate::error::OperatorError;
use crate::paraproduct::paraproduct_with;
use crate::sequence::{check_vector, MatrixSequence};

/// Precomputed `V_I A_I^ε` and leaf values of `W^{−1/p}`.
#[derive(Clone, Debug)]
pub struct BigPi {
    conjugated: MatrixSequence,
    w_inv: StepFunction,
}

impl BigPi {
    pub fn new(a: &MatrixSequence, table: &ReducingTable, lw: &LeafWeights) -> Result<Self, OperatorError> {
        let g = a.grid();
        g.check_same(table.grid())?;
        g.check_same(lw.grid())?;
        let n = a.n();
        if table.n() != n || lw.n() != n {
            return Err(OperatorError::Shape("sequence, weight and reducing operators differ in dimension".into()));
        }
        let mut conjugated = MatrixSequence::zeros(g, n);
        for c in g.interior_cubes() {
            let v: &DMatrix<f64> = table.v(c);
            for eps in dyadic_core::Signature::cancellative(g.d()) {
                conjugated.set(c, eps, &(v * a.get(c, eps)));
            }
        }
        Ok(BigPi { conjugated, w_inv: lw.power_step(-1.0 / table.p()) })
    }

    pub fn grid(&self) -> &dyadic_core::Grid {
        self.conjugated.grid()
    }

    pub fn n(&self) -> usize {
        self.conjugated.n()
    }

    /// Coefficients `V_I A_I^ε`.
    pub fn conjugated(&self) -> &MatrixSequence {
        &self.conjugated
    }

    pub fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        check_vector(f, self.n())?;
        paraproduct_with(&self.conjugated, &self.w_inv.apply(f)?)
    }
}

/// One-shot `Π_A f`.
pub fn apply_big_pi(a: &MatrixSequence, table: &ReducingTable, lw: &LeafWeights, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    BigPi::new(a, table, lw)?.apply(f)
}
