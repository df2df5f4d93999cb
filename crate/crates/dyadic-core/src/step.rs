//! Vector and matrix valued functions constant on the leaves of a grid.

use crate::error::DyadicError;
use crate::grid::{Cube, Grid};

/// Value type carried on each leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    /// Column vector in `R^n`.
    Vector(usize),
    /// Row-major `n × n` matrix.
    Matrix(usize),
}

impl Shape {
    pub fn width(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector(n) => n,
            Shape::Matrix(n) => n * n,
        }
    }

    fn describe(self) -> String {
        format!("{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    grid: Grid,
    shape: Shape,
    data: Vec<f64>,
}

impl StepFunction {
    pub fn zeros(grid: &Grid, shape: Shape) -> Self {
        StepFunction { grid: grid.clone(), shape, data: vec![0.0; grid.num_leaves() * shape.width()] }
    }

    pub fn from_data(grid: &Grid, shape: Shape, data: Vec<f64>) -> Result<Self, DyadicError> {
        let expected = grid.num_leaves() * shape.width();
        if data.len() != expected {
            return Err(DyadicError::Shape {
                expected: format!("{expected} values"),
                got: format!("{} values", data.len()),
            });
        }
        Ok(StepFunction { grid: grid.clone(), shape, data })
    }

    /// Builds a function leaf by leaf; `f(j, out)` fills the value of leaf `j`.
    pub fn from_fn(grid: &Grid, shape: Shape, mut f: impl FnMut(usize, &mut [f64])) -> Self {
        let mut out = Self::zeros(grid, shape);
        let w = shape.width();
        for (j, chunk) in out.data.chunks_mut(w).enumerate() {
            f(j, chunk);
        }
        out
    }

    pub fn constant(grid: &Grid, shape: Shape, value: &[f64]) -> Self {
        assert_eq!(value.len(), shape.width());
        Self::from_fn(grid, shape, |_, out| out.copy_from_slice(value))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.shape.width()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn leaf(&self, j: usize) -> &[f64] {
        let w = self.width();
        &self.data[j * w..(j + 1) * w]
    }

    pub fn leaf_mut(&mut self, j: usize) -> &mut [f64] {
        let w = self.width();
        &mut self.data[j * w..(j + 1) * w]
    }

    pub fn check_compatible(&self, other: &StepFunction) -> Result<(), DyadicError> {
        self.grid.check_same(&other.grid)?;
        if self.shape != other.shape {
            return Err(DyadicError::Shape { expected: self.shape.describe(), got: other.shape.describe() });
        }
        Ok(())
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction, DyadicError> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(StepFunction { grid: self.grid.clone(), shape: self.shape, data })
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction, DyadicError> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(StepFunction { grid: self.grid.clone(), shape: self.shape, data })
    }

    pub fn scale(&self, s: f64) -> StepFunction {
        StepFunction { grid: self.grid.clone(), shape: self.shape, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Pointwise `M(x) v(x)` for a matrix function `self` and vector function `v`.
    pub fn apply(&self, v: &StepFunction) -> Result<StepFunction, DyadicError> {
        self.grid.check_same(&v.grid)?;
        let n = match (self.shape, v.shape) {
            (Shape::Matrix(n), Shape::Vector(m)) if n == m => n,
            _ => {
                return Err(DyadicError::Shape {
                    expected: "matrix times vector of equal size".into(),
                    got: format!("{:?} times {:?}", self.shape, v.shape),
                })
            }
        };
        let mut out = StepFunction::zeros(&self.grid, Shape::Vector(n));
        for j in 0..self.grid.num_leaves() {
            let m = self.leaf(j);
            let x = v.leaf(j);
            let y = out.leaf_mut(j);
            for r in 0..n {
                y[r] = (0..n).map(|c| m[r * n + c] * x[c]).sum();
            }
        }
        Ok(out)
    }

    /// Pointwise matrix product `self(x) other(x)`.
    pub fn matmul(&self, other: &StepFunction) -> Result<StepFunction, DyadicError> {
        self.check_compatible(other)?;
        let Shape::Matrix(n) = self.shape else {
            return Err(DyadicError::Shape { expected: "matrix".into(), got: self.shape.describe() });
        };
        let mut out = StepFunction::zeros(&self.grid, self.shape);
        for j in 0..self.grid.num_leaves() {
            let (a, b) = (self.leaf(j), other.leaf(j));
            let y = out.leaf_mut(j);
            for r in 0..n {
                for c in 0..n {
                    y[r * n + c] = (0..n).map(|k| a[r * n + k] * b[k * n + c]).sum();
                }
            }
        }
        Ok(out)
    }

    /// Pointwise transpose of a matrix function.
    pub fn transpose(&self) -> StepFunction {
        match self.shape {
            Shape::Matrix(n) => {
                let mut out = self.clone();
                for j in 0..self.grid.num_leaves() {
                    let src = self.leaf(j);
                    let dst = out.leaf_mut(j);
                    for r in 0..n {
                        for c in 0..n {
                            dst[c * n + r] = src[r * n + c];
                        }
                    }
                }
                out
            }
            _ => self.clone(),
        }
    }

    /// `∫ ⟨f, g⟩` (Frobenius pairing for matrices).
    pub fn inner(&self, other: &StepFunction) -> Result<f64, DyadicError> {
        self.check_compatible(other)?;
        Ok(self.grid.leaf_measure() * self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>())
    }

    /// `∫ |f|²` with the Euclidean / Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.grid.leaf_measure() * self.data.iter().map(|a| a * a).sum::<f64>()
    }

    /// Pointwise Euclidean (or Frobenius) norm as a scalar function.
    pub fn pointwise_norm(&self) -> StepFunction {
        let w = self.width();
        let data = self.data.chunks(w).map(|c| c.iter().map(|a| a * a).sum::<f64>().sqrt()).collect();
        StepFunction { grid: self.grid.clone(), shape: Shape::Scalar, data }
    }

    /// Averages over every cube, indexed by cube id (levels `0..=L`), each of width `w`.
    pub fn cube_means(&self) -> Vec<f64> {
        let g = &self.grid;
        let w = self.width();
        let b = g.branching();
        let mut out = vec![0.0; g.num_cubes() * w];
        let leaf_start = g.level_range(g.depth()).start * w;
        out[leaf_start..].copy_from_slice(&self.data);
        for k in (0..g.depth()).rev() {
            let range = g.level_range(k);
            let child_start = g.level_range(k + 1).start;
            for (local, id) in range.enumerate() {
                for comp in 0..w {
                    let mut s = 0.0;
                    for j in 0..b {
                        s += out[(child_start + local * b + j) * w + comp];
                    }
                    out[id * w + comp] = s / b as f64;
                }
            }
        }
        out
    }

    /// Average of the function over one cube.
    pub fn mean_over(&self, c: Cube) -> Vec<f64> {
        let w = self.width();
        let r = self.grid.leaf_range(c);
        let count = r.len() as f64;
        let mut acc = vec![0.0; w];
        for j in r {
            for (a, v) in acc.iter_mut().zip(self.leaf(j)) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= count);
        acc
    }

    pub fn max_abs_diff(&self, other: &StepFunction) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
