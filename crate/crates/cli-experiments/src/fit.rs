//! Least-squares growth fits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

impl LineFit {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// `y ≈ slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "a line needs two points");
    let a = DMatrix::from_fn(x.len(), 2, |r, c| if c == 0 { x[r] } else { 1.0 });
    let b = DVector::from_column_slice(y);
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).expect("both factors requested");
    let residuals = (&b - &a * &sol).iter().cloned().collect();
    LineFit { slope: sol[0], intercept: sol[1], residuals }
}

/// Fit of `log₂ y` against `x`.
pub fn fit_log2(x: &[f64], y: &[f64]) -> LineFit {
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    fit_line(x, &ly)
}

/// Fit of `log y` against `log x`.
pub fn fit_power(x: &[f64], y: &[f64]) -> LineFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}
