//! Norms of linear operators on `L^p(W)` over the leaf basis.

use dyadic_core::{Grid, Shape, StepFunction};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use weights::LeafWeights;

use crate::big_pi::BigPi;
use crate::commutator::{apply_commutator, CommutatorMode};
use crate::error::OperatorError;
use crate::multiplier::apply_haar_multiplier;
use crate::paraproduct::{adjoint_paraproduct_with, paraproduct_with};
use crate::sequence::{MatrixSequence, MatrixSymbol};
use crate::shift::{apply_haar_shift, ShiftMap};

pub trait LinearOperator: Sync {
    fn grid(&self) -> &Grid;
    fn n(&self) -> usize;
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError>;
}

pub struct Paraproduct(pub MatrixSequence);
pub struct AdjointParaproduct(pub MatrixSequence);
pub struct HaarMultiplier(pub MatrixSequence);
pub struct HaarShift {
    pub sigma: ShiftMap,
    pub n: usize,
}
pub struct Commutator {
    pub symbol: MatrixSymbol,
    pub sigma: ShiftMap,
    pub mode: CommutatorMode,
}

impl LinearOperator for Paraproduct {
    fn grid(&self) -> &Grid {
        self.0.grid()
    }
    fn n(&self) -> usize {
        self.0.n()
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        paraproduct_with(&self.0, f)
    }
}

impl LinearOperator for AdjointParaproduct {
    fn grid(&self) -> &Grid {
        self.0.grid()
    }
    fn n(&self) -> usize {
        self.0.n()
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        adjoint_paraproduct_with(&self.0, f)
    }
}

impl LinearOperator for HaarMultiplier {
    fn grid(&self) -> &Grid {
        self.0.grid()
    }
    fn n(&self) -> usize {
        self.0.n()
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        apply_haar_multiplier(&self.0, f)
    }
}

impl LinearOperator for HaarShift {
    fn grid(&self) -> &Grid {
        self.sigma.grid()
    }
    fn n(&self) -> usize {
        self.n
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        apply_haar_shift(&self.sigma, f)
    }
}

impl LinearOperator for Commutator {
    fn grid(&self) -> &Grid {
        self.symbol.grid()
    }
    fn n(&self) -> usize {
        self.symbol.n()
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        apply_commutator(&self.symbol, &self.sigma, f, self.mode)
    }
}

impl LinearOperator for BigPi {
    fn grid(&self) -> &Grid {
        BigPi::grid(self)
    }
    fn n(&self) -> usize {
        BigPi::n(self)
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        BigPi::apply(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Exact,
    LowerBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub kind: NormKind,
    /// Leaf values (row-major by leaf) of a function attaining or certifying `value`.
    pub witness: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    /// Largest admissible `leaves × n`.
    pub cap: usize,
    /// Dimension up to which a full SVD is used.
    pub dense_svd_limit: usize,
    pub max_iter: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { cap: 8192, dense_svd_limit: 512, max_iter: 400 }
    }
}

/// Matrix of `x ↦ W^{1/p} T (W^{−1/p} x)` in the orthonormal leaf basis.
///
/// Passing `None` for the weight gives the unweighted matrix of `T`.
pub fn conjugated_matrix<T: LinearOperator + ?Sized>(op: &T, w: Option<&LeafWeights>, p: f64, cap: usize) -> Result<DMatrix<f64>, OperatorError> {
    let g = op.grid();
    let n = op.n();
    let nl = g.num_leaves();
    let dim = nl * n;
    if dim > cap {
        return Err(OperatorError::DimensionCap { dim, cap });
    }
    if let Some(lw) = w {
        g.check_same(lw.grid())?;
        if lw.n() != n {
            return Err(OperatorError::Shape(format!("weight of size {} for operator on R^{n}", lw.n())));
        }
    }
    let (up, down): (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) = match w {
        Some(lw) => (0..nl).into_par_iter().map(|j| (lw.power(j, 1.0 / p), lw.power(j, -1.0 / p))).unzip(),
        None => (vec![DMatrix::identity(n, n); nl], vec![DMatrix::identity(n, n); nl]),
    };
    let mut data = vec![0.0; dim * dim];
    data.par_chunks_mut(dim).enumerate().try_for_each(|(col, out)| -> Result<(), OperatorError> {
        let (j, c) = (col / n, col % n);
        let mut f = StepFunction::zeros(g, Shape::Vector(n));
        for r in 0..n {
            f.leaf_mut(j)[r] = down[j][(r, c)];
        }
        let tf = op.apply(&f)?;
        for jj in 0..nl {
            let y = tf.leaf(jj);
            for r in 0..n {
                out[jj * n + r] = (0..n).map(|k| up[jj][(r, k)] * y[k]).sum();
            }
        }
        Ok(())
    })?;
    Ok(DMatrix::from_vec(dim, dim, data))
}

/// Largest singular value and a right singular vector.
pub fn top_singular(m: &DMatrix<f64>, opts: &NormOptions) -> (f64, DVector<f64>) {
    let dim = m.ncols();
    if dim <= opts.dense_svd_limit {
        let svd = m.clone().svd(false, true);
        let (k, s) = svd.singular_values.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        let vt = svd.v_t.expect("requested");
        return (s, vt.row(k).transpose());
    }
    lanczos_top(m, opts.max_iter.min(dim))
}

/// Lanczos on `MᵀM` with full reorthogonalization.
fn lanczos_top(m: &DMatrix<f64>, steps: usize) -> (f64, DVector<f64>) {
    let dim = m.ncols();
    let mut q: Vec<DVector<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    // deterministic start with weight on every coordinate
    let mut v = DVector::from_fn(dim, |i, _| 1.0 + ((i * 7919) % 101) as f64 / 101.0);
    v /= v.norm();
    let mut last = 0.0;
    let mut best = (0.0, v.clone());
    for k in 0..steps {
        q.push(v.clone());
        let mut w = m.tr_mul(&(m * &v));
        let a = v.dot(&w);
        alpha.push(a);
        for _ in 0..2 {
            for qi in &q {
                let c = qi.dot(&w);
                w.axpy(-c, qi, 1.0);
            }
        }
        let b = w.norm();
        let t = DMatrix::from_fn(k + 1, k + 1, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (i, &lam) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let done = (lam - last).abs() <= 1e-14 * lam.abs() || b <= 1e-14 * lam.abs().max(1e-300) || k + 1 == steps;
        last = lam;
        if done {
            let s = eig.eigenvectors.column(i);
            let mut x = DVector::zeros(dim);
            for (j, qj) in q.iter().enumerate() {
                x.axpy(s[j], qj, 1.0);
            }
            let nx = x.norm();
            x /= nx;
            // the Rayleigh quotient of the assembled vector is a guaranteed lower bound
            let r = (m * &x).norm();
            best = (r.max(lam.max(0.0).sqrt()), x);
            break;
        }
        beta.push(b);
        v = w / b;
    }
    best
}

fn mixed_norm(x: &DVector<f64>, n: usize, p: f64) -> f64 {
    x.as_slice().chunks(n).map(|c| c.iter().map(|a| a * a).sum::<f64>().sqrt().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `|y|^{q−2} y` blockwise.
fn duality_map(y: &DVector<f64>, n: usize, q: f64) -> DVector<f64> {
    let mut out = y.clone();
    for c in out.as_mut_slice().chunks_mut(n) {
        let r = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        let s = if r > 0.0 { r.powf(q - 2.0) } else { 0.0 };
        c.iter_mut().for_each(|a| *a *= s);
    }
    out
}

/// `‖T‖_{L^p(W)}`: exact at `p = 2`, a certified lower bound otherwise.
pub fn weighted_operator_norm<T: LinearOperator + ?Sized>(op: &T, w: Option<&LeafWeights>, p: f64, opts: &NormOptions) -> Result<NormReport, OperatorError> {
    let n = op.n();
    let m = conjugated_matrix(op, w, p, opts.cap)?;
    let undo = |x: &DVector<f64>| -> Vec<f64> {
        match w {
            None => x.as_slice().to_vec(),
            Some(lw) => {
                let mut out = vec![0.0; x.len()];
                for (j, (o, xi)) in out.chunks_mut(n).zip(x.as_slice().chunks(n)).enumerate() {
                    let d = lw.power(j, -1.0 / p);
                    for r in 0..n {
                        o[r] = (0..n).map(|k| d[(r, k)] * xi[k]).sum();
                    }
                }
                out
            }
        }
    };
    if p == 2.0 {
        let (s, v) = top_singular(&m, opts);
        return Ok(NormReport { value: s, kind: NormKind::Exact, witness: undo(&v) });
    }
    let q = p / (p - 1.0);
    let (_, mut x) = top_singular(&m, opts);
    let mut best = (0.0, x.clone());
    for _ in 0..opts.max_iter.min(200) {
        let nx = mixed_norm(&x, n, p);
        if nx == 0.0 || !nx.is_finite() {
            break;
        }
        x /= nx;
        let y = &m * &x;
        let ratio = mixed_norm(&y, n, p);
        if !ratio.is_finite() {
            break;
        }
        if ratio > best.0 * (1.0 + 1e-13) {
            best = (ratio, x.clone());
        } else if ratio <= best.0 {
            break;
        }
        x = duality_map(&m.tr_mul(&duality_map(&y, n, p)), n, q);
    }
    Ok(NormReport { value: best.0, kind: NormKind::LowerBound, witness: undo(&best.1) })
}
