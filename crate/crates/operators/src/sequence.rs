//! Matrix symbols and matrix sequences indexed by `(cube, signature)`.

use dyadic_core::{haar_transform, Cube, Grid, HaarExpansion, Shape, Signature, StepFunction};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OperatorError;

/// `A_I^ε` for every cube above leaf level and every cancellative signature.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSequence {
    grid: Grid,
    n: usize,
    data: Vec<f64>,
}

impl MatrixSequence {
    pub fn zeros(grid: &Grid, n: usize) -> Self {
        MatrixSequence { grid: grid.clone(), n, data: vec![0.0; grid.num_interior() * grid.num_signatures() * n * n] }
    }

    pub fn from_fn(grid: &Grid, n: usize, mut f: impl FnMut(Cube, Signature) -> DMatrix<f64>) -> Self {
        let mut s = Self::zeros(grid, n);
        for c in grid.interior_cubes() {
            for eps in Signature::cancellative(grid.d()) {
                s.set(c, eps, &f(c, eps));
            }
        }
        s
    }

    /// The same matrix at every index.
    pub fn constant(grid: &Grid, m: &DMatrix<f64>) -> Self {
        Self::from_fn(grid, m.nrows(), |_, _| m.clone())
    }

    /// Entries uniform in `[-scale, scale]`.
    pub fn random(grid: &Grid, n: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Self::zeros(grid, n);
        s.data.iter_mut().for_each(|a| *a = rng.random_range(-scale..=scale));
        s
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn offset(&self, id: usize, eps: usize) -> usize {
        (id * self.grid.num_signatures() + eps) * self.n * self.n
    }

    /// Row-major entries of `A_I^ε` by cube id and signature index.
    pub fn slot(&self, id: usize, eps: usize) -> &[f64] {
        let o = self.offset(id, eps);
        &self.data[o..o + self.n * self.n]
    }

    pub fn slot_mut(&mut self, id: usize, eps: usize) -> &mut [f64] {
        let o = self.offset(id, eps);
        let nn = self.n * self.n;
        &mut self.data[o..o + nn]
    }

    pub fn get(&self, c: Cube, eps: Signature) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, self.slot(self.grid.id(c), eps.index()))
    }

    pub fn set(&mut self, c: Cube, eps: Signature, m: &DMatrix<f64>) {
        let n = self.n;
        let id = self.grid.id(c);
        let slot = self.slot_mut(id, eps.index());
        for r in 0..n {
            for k in 0..n {
                slot[r * n + k] = m[(r, k)];
            }
        }
    }

    /// Every `A_I^ε` transposed.
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for (dst, src) in out.data.chunks_mut(n * n).zip(self.data.chunks(n * n)) {
            for r in 0..n {
                for k in 0..n {
                    dst[k * n + r] = src[r * n + k];
                }
            }
        }
        out
    }

    /// `sup_{I,ε} ‖A_I^ε‖`.
    pub fn sup_norm(&self) -> f64 {
        let n = self.n;
        self.data
            .chunks(n * n)
            .map(|c| weights::linalg::op_norm(&DMatrix::from_row_slice(n, n, c)))
            .fold(0.0, f64::max)
    }
}

/// A matrix function `B` with its Haar coefficients and cube means.
#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    b: StepFunction,
    n: usize,
    coeffs: MatrixSequence,
    means: Vec<f64>,
}

impl MatrixSymbol {
    pub fn new(b: StepFunction) -> Result<Self, OperatorError> {
        let Shape::Matrix(n) = b.shape() else {
            return Err(OperatorError::Shape(format!("symbol must be matrix valued, got {:?}", b.shape())));
        };
        let e: HaarExpansion = haar_transform(&b);
        let coeffs = MatrixSequence { grid: b.grid().clone(), n, data: e.raw().to_vec() };
        let means = b.cube_means();
        Ok(MatrixSymbol { b, n, coeffs, means })
    }

    /// `b(x) · M` for a scalar step function `b`.
    pub fn scalar_times(b: &StepFunction, m: &DMatrix<f64>) -> Result<Self, OperatorError> {
        if b.shape() != Shape::Scalar {
            return Err(OperatorError::Shape("expected a scalar function".into()));
        }
        let n = m.nrows();
        let f = StepFunction::from_fn(b.grid(), Shape::Matrix(n), |j, out| {
            for r in 0..n {
                for k in 0..n {
                    out[r * n + k] = b.leaf(j)[0] * m[(r, k)];
                }
            }
        });
        Self::new(f)
    }

    pub fn function(&self) -> &StepFunction {
        &self.b
    }

    pub fn grid(&self) -> &Grid {
        self.b.grid()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &MatrixSequence {
        &self.coeffs
    }

    pub fn coefficient(&self, c: Cube, eps: Signature) -> DMatrix<f64> {
        self.coeffs.get(c, eps)
    }

    pub fn mean(&self, c: Cube) -> DMatrix<f64> {
        let nn = self.n * self.n;
        let id = self.grid().id(c);
        DMatrix::from_row_slice(self.n, self.n, &self.means[id * nn..(id + 1) * nn])
    }

    /// The pointwise transpose `B*`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.b.transpose()).expect("transpose keeps the shape")
    }
}

/// `out += s · M x` for row-major `M`.
pub(crate) fn mat_vec_acc(m: &[f64], x: &[f64], s: f64, out: &mut [f64]) {
    let n = x.len();
    for r in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            acc += m[r * n + k] * x[k];
        }
        out[r] += s * acc;
    }
}

pub(crate) fn check_vector(f: &StepFunction, n: usize) -> Result<(), OperatorError> {
    if f.shape() != Shape::Vector(n) {
        return Err(OperatorError::Shape(format!("expected vectors of length {n}, got {:?}", f.shape())));
    }
    Ok(())
}
