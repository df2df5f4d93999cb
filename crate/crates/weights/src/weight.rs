//! Matrix weight generators and their cell averages.
//!
//! Power kinds `R diag(|x|^{α_i}) Rᵀ` are averaged in closed form on `d = 1`
//! grids. Everything else, including power kinds when a leaf model is
//! requested, is the leaf-constant weight whose value on a leaf is the value
//! at its midpoint.

use dyadic_core::{Cube, Grid, Shape, StepFunction};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::WeightError;
use crate::linalg::{plane_rotation, random_orthogonal, spectral_map, sym_eigen};

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixWeight {
    Identity {
        #[serde(default = "two")]
        n: usize,
    },
    /// `|x|^α · Id`.
    ScalarPower {
        alpha: f64,
        #[serde(default = "two")]
        n: usize,
    },
    /// `diag(|x|^{α_1}, …, |x|^{α_n})`.
    DiagonalPower { alphas: Vec<f64> },
    /// `R diag(|x|^{α_i}) Rᵀ`, `R` a rotation by `theta` in the first coordinate plane.
    Rotated { alphas: Vec<f64>, theta: f64 },
    /// Independent `Q diag(λ) Qᵀ` on each leaf, `log λ` uniform on `[0, log cond]`.
    RandomSpd {
        seed: u64,
        cond: f64,
        #[serde(default = "two")]
        n: usize,
    },
    Constant { rows: Vec<Vec<f64>> },
    /// Row-major `n × n` value per leaf.
    Leaf { n: usize, values: Vec<f64> },
    /// `base^s`.
    Power { base: Box<MatrixWeight>, s: f64 },
    /// Eigenvalues of `base` clamped to `[1/cut, cut]`.
    Truncated { base: Box<MatrixWeight>, cut: f64 },
}

/// `W(x) = R diag(|x|^{e_i}) Rᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerProfile {
    pub exponents: Vec<f64>,
    pub rotation: DMatrix<f64>,
}

impl PowerProfile {
    fn at_radius(&self, r: f64, s: f64) -> (DVector<f64>, &DMatrix<f64>) {
        (DVector::from_iterator(self.exponents.len(), self.exponents.iter().map(|e| r.powf(e * s))), &self.rotation)
    }
}

/// `(1/(b−a)) ∫_a^b |x|^e dx`.
pub fn power_interval_mean(a: f64, b: f64, e: f64) -> f64 {
    if e == 0.0 {
        return 1.0;
    }
    let prim = |x: f64| x.signum() * x.abs().powf(e + 1.0) / (e + 1.0);
    (prim(b) - prim(a)) / (b - a)
}

impl MatrixWeight {
    pub fn identity(n: usize) -> Self {
        MatrixWeight::Identity { n }
    }

    pub fn diagonal_power(alphas: &[f64]) -> Self {
        MatrixWeight::DiagonalPower { alphas: alphas.to_vec() }
    }

    /// `diag(|x|^α, |x|^{−α})`.
    pub fn counterexample(alpha: f64) -> Self {
        Self::diagonal_power(&[alpha, -alpha])
    }

    pub fn n(&self) -> usize {
        match self {
            MatrixWeight::Identity { n } | MatrixWeight::ScalarPower { n, .. } | MatrixWeight::RandomSpd { n, .. } => *n,
            MatrixWeight::DiagonalPower { alphas } | MatrixWeight::Rotated { alphas, .. } => alphas.len(),
            MatrixWeight::Constant { rows } => rows.len(),
            MatrixWeight::Leaf { n, .. } => *n,
            MatrixWeight::Power { base, .. } | MatrixWeight::Truncated { base, .. } => base.n(),
        }
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        let bad = |m: String| Err(WeightError::InvalidParameter(m));
        if self.n() == 0 {
            return bad("dimension must be positive".into());
        }
        match self {
            MatrixWeight::ScalarPower { alpha, .. } if !alpha.is_finite() => bad(format!("alpha {alpha}")),
            MatrixWeight::DiagonalPower { alphas } | MatrixWeight::Rotated { alphas, .. }
                if alphas.iter().any(|a| !a.is_finite()) =>
            {
                bad(format!("alphas {alphas:?}"))
            }
            MatrixWeight::RandomSpd { cond, .. } if !(*cond >= 1.0 && cond.is_finite()) => {
                bad(format!("condition number {cond} must be ≥ 1"))
            }
            MatrixWeight::Constant { rows } => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return bad("constant weight must be square".into());
                }
                let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
                if !crate::linalg::is_spd(&m) {
                    return bad("constant weight must be symmetric positive definite".into());
                }
                Ok(())
            }
            MatrixWeight::Leaf { n, values } if values.len() % (n * n) != 0 => {
                bad(format!("{} leaf entries is not a multiple of {}", values.len(), n * n))
            }
            MatrixWeight::Power { base, s } => {
                if !s.is_finite() {
                    return bad(format!("power {s}"));
                }
                base.validate()
            }
            MatrixWeight::Truncated { base, cut } => {
                if !(*cut >= 1.0) {
                    return bad(format!("truncation level {cut} must be ≥ 1"));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Exponents and rotation for weights of the form `R diag(|x|^{e_i}) Rᵀ`.
    pub fn profile(&self) -> Option<PowerProfile> {
        match self {
            MatrixWeight::Identity { n } => Some(PowerProfile { exponents: vec![0.0; *n], rotation: DMatrix::identity(*n, *n) }),
            MatrixWeight::ScalarPower { alpha, n } => {
                Some(PowerProfile { exponents: vec![*alpha; *n], rotation: DMatrix::identity(*n, *n) })
            }
            MatrixWeight::DiagonalPower { alphas } => {
                let n = alphas.len();
                Some(PowerProfile { exponents: alphas.clone(), rotation: DMatrix::identity(n, n) })
            }
            MatrixWeight::Rotated { alphas, theta } => {
                Some(PowerProfile { exponents: alphas.clone(), rotation: plane_rotation(alphas.len(), *theta) })
            }
            MatrixWeight::Power { base, s } => base.profile().map(|mut p| {
                p.exponents.iter_mut().for_each(|e| *e *= s);
                p
            }),
            _ => None,
        }
    }

    /// Whether [`cell_average`](Self::cell_average) integrates exactly rather than summing leaves.
    pub fn has_closed_form(&self, grid: &Grid) -> bool {
        grid.d() == 1 && self.profile().is_some()
    }

    fn check_integrable(&self, grid: &Grid, c: Cube, s: f64) -> Result<(), WeightError> {
        let Some(p) = self.profile() else { return Ok(()) };
        let (lower, side) = grid.geometry(c);
        let touches_origin = lower.iter().all(|&a| a <= 0.0 && 0.0 <= a + side);
        if !touches_origin {
            return Ok(());
        }
        let limit = -(grid.d() as f64);
        for e in &p.exponents {
            if e * s <= limit {
                return Err(WeightError::Integrability { exponent: e * s, cube: c });
            }
        }
        Ok(())
    }

    /// Value of `W^s` on leaf `j` in the leaf-constant model.
    pub fn leaf_power(&self, grid: &Grid, j: usize, s: f64) -> Result<DMatrix<f64>, WeightError> {
        let (vals, vecs) = self.leaf_eigen(grid, j)?;
        Ok(spectral_map(&vals, &vecs, |l| l.powf(s)))
    }

    pub fn leaf_value(&self, grid: &Grid, j: usize) -> Result<DMatrix<f64>, WeightError> {
        self.leaf_power(grid, j, 1.0)
    }

    /// Eigenvalues and eigenvectors of the leaf value; exact for power kinds.
    pub fn leaf_eigen(&self, grid: &Grid, j: usize) -> Result<(DVector<f64>, DMatrix<f64>), WeightError> {
        if let Some(p) = self.profile() {
            let x = grid.leaf_midpoint(j);
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            let (vals, rot) = p.at_radius(r, 1.0);
            return Ok((vals, rot.clone()));
        }
        match self {
            MatrixWeight::RandomSpd { seed, cond, n } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(j as u64);
                let q = random_orthogonal(*n, &mut rng);
                let lc = cond.ln();
                let vals = DVector::from_fn(*n, |_, _| (rng.random::<f64>() * lc).exp());
                Ok((vals, q))
            }
            MatrixWeight::Constant { rows } => {
                let n = rows.len();
                Ok(sym_eigen(&DMatrix::from_fn(n, n, |r, c| rows[r][c])))
            }
            MatrixWeight::Leaf { n, values } => {
                let nn = n * n;
                let expected = grid.num_leaves() * nn;
                if values.len() != expected {
                    return Err(WeightError::LeafCount { expected, found: values.len() });
                }
                Ok(sym_eigen(&DMatrix::from_row_slice(*n, *n, &values[j * nn..(j + 1) * nn])))
            }
            MatrixWeight::Power { base, s } => {
                let (vals, vecs) = base.leaf_eigen(grid, j)?;
                Ok((vals.map(|l| l.powf(*s)), vecs))
            }
            MatrixWeight::Truncated { base, cut } => {
                let (vals, vecs) = base.leaf_eigen(grid, j)?;
                Ok((vals.map(|l| l.clamp(1.0 / cut, *cut)), vecs))
            }
            _ => unreachable!("power kinds handled above"),
        }
    }

    /// `(1/|I|) ∫_I W^s`: closed form for power kinds in `d = 1`, leaf sums otherwise.
    pub fn cell_average(&self, grid: &Grid, c: Cube, s: f64) -> Result<DMatrix<f64>, WeightError> {
        self.check_integrable(grid, c, s)?;
        if self.has_closed_form(grid) {
            let p = self.profile().expect("closed form has a profile");
            let (lower, side) = grid.geometry(c);
            let (a, b) = (lower[0], lower[0] + side);
            let vals = DVector::from_iterator(p.exponents.len(), p.exponents.iter().map(|e| power_interval_mean(a, b, e * s)));
            return Ok(spectral_map(&vals, &p.rotation, |l| l));
        }
        self.leaf_average(grid, c, s)
    }

    /// Average of the leaf-constant model of `W^s` over `c`.
    pub fn leaf_average(&self, grid: &Grid, c: Cube, s: f64) -> Result<DMatrix<f64>, WeightError> {
        self.check_integrable(grid, c, s)?;
        let n = self.n();
        let r = grid.leaf_range(c);
        let count = r.len() as f64;
        let mut acc = DMatrix::zeros(n, n);
        for j in r {
            acc += self.leaf_power(grid, j, s)?;
        }
        Ok(acc / count)
    }

    /// Eigendecomposition of every leaf value, ready for repeated use.
    pub fn materialize(&self, grid: &Grid) -> Result<LeafWeights, WeightError> {
        LeafWeights::new(self, grid)
    }
}

/// Leaf-constant weight with cached eigendecompositions.
#[derive(Clone, Debug)]
pub struct LeafWeights {
    grid: Grid,
    n: usize,
    vals: Vec<f64>,
    vecs: Vec<f64>,
}

impl LeafWeights {
    pub fn new(w: &MatrixWeight, grid: &Grid) -> Result<Self, WeightError> {
        w.validate()?;
        let n = w.n();
        let parts: Result<Vec<_>, _> = (0..grid.num_leaves()).into_par_iter().map(|j| w.leaf_eigen(grid, j)).collect();
        let parts = parts?;
        let mut vals = Vec::with_capacity(parts.len() * n);
        let mut vecs = Vec::with_capacity(parts.len() * n * n);
        for (v, u) in parts {
            if v.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(WeightError::InvalidParameter("leaf value is not positive definite".into()));
            }
            vals.extend(v.iter());
            vecs.extend(u.iter());
        }
        Ok(LeafWeights { grid: grid.clone(), n, vals, vecs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self, j: usize) -> &[f64] {
        &self.vals[j * self.n..(j + 1) * self.n]
    }

    /// `W(x_j)^s`.
    pub fn power(&self, j: usize, s: f64) -> DMatrix<f64> {
        let n = self.n;
        let vals = DVector::from_column_slice(self.eigenvalues(j));
        let vecs = DMatrix::from_column_slice(n, n, &self.vecs[j * n * n..(j + 1) * n * n]);
        spectral_map(&vals, &vecs, |l| l.powf(s))
    }

    pub fn value(&self, j: usize) -> DMatrix<f64> {
        self.power(j, 1.0)
    }

    /// `W^s` as a matrix step function.
    pub fn power_step(&self, s: f64) -> StepFunction {
        let n = self.n;
        let mats: Vec<DMatrix<f64>> = (0..self.grid.num_leaves()).into_par_iter().map(|j| self.power(j, s)).collect();
        StepFunction::from_fn(&self.grid, Shape::Matrix(n), |j, out| {
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] = mats[j][(r, c)];
                }
            }
        })
    }

    /// Leaf average of `W^s` over every cube, by cube id.
    pub fn all_means(&self, s: f64) -> Vec<DMatrix<f64>> {
        let n = self.n;
        let means = self.power_step(s).cube_means();
        means.chunks(n * n).map(|c| DMatrix::from_row_slice(n, n, c)).collect()
    }

    pub fn to_weight(&self) -> MatrixWeight {
        let n = self.n;
        let mut values = Vec::with_capacity(self.grid.num_leaves() * n * n);
        for j in 0..self.grid.num_leaves() {
            let v = self.value(j);
            for r in 0..n {
                for c in 0..n {
                    values.push(v[(r, c)]);
                }
            }
        }
        MatrixWeight::Leaf { n, values }
    }
}

/// `(W^{1−p′}, p′)`. Dualizing twice returns the original weight unchanged.
pub fn dual_weight(w: &MatrixWeight, p: f64) -> Result<(MatrixWeight, f64), WeightError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(WeightError::Exponent(p));
    }
    w.validate()?;
    let pp = p / (p - 1.0);
    let s = 1.0 - pp;
    let dual = match w {
        MatrixWeight::Identity { n } => MatrixWeight::Identity { n: *n },
        MatrixWeight::Power { base, s: s0 } if (s0 * s - 1.0).abs() < 1e-9 => (**base).clone(),
        _ => MatrixWeight::Power { base: Box::new(w.clone()), s },
    };
    Ok((dual, pp))
}

/// `W_n`: eigenvalues below `1/n_cut` raised to `1/n_cut`, above `n_cut` lowered to `n_cut`.
pub fn truncate_weight(w: &MatrixWeight, n_cut: f64) -> Result<MatrixWeight, WeightError> {
    let t = MatrixWeight::Truncated { base: Box::new(w.clone()), cut: n_cut };
    t.validate()?;
    Ok(t)
}

/// Conjugate exponent.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}
