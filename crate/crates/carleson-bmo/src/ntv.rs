//! The two scalar Carleson forms
//! `sup_J (|J|^{-1} Σ_{I ⊆ J} a_I²)^{1/2}` and
//! `sup_J (|J|^{-1} ∫_J (Σ_{I ⊆ J} a_I² χ_I/|I|)^{p/2})^{1/p}`.

use dyadic_core::{subtree_sums, Grid};
use serde::Serialize;

use crate::error::CarlesonError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NtvForms {
    pub sup_form: f64,
    pub lp_form: f64,
}

impl NtvForms {
    pub fn ratio(&self) -> f64 {
        self.lp_form / self.sup_form
    }
}

/// Both forms for a nonnegative sequence indexed by cube id.
pub fn ntv_scalar_equivalence(grid: &Grid, a: &[f64], p: f64) -> Result<NtvForms, CarlesonError> {
    if a.len() != grid.num_cubes() {
        return Err(CarlesonError::InvalidInput(format!("{} values for {} cubes", a.len(), grid.num_cubes())));
    }
    if a.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(CarlesonError::InvalidInput("sequence must be finite and nonnegative".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(CarlesonError::InvalidInput(format!("exponent {p} must lie in (1, ∞)")));
    }
    let sq: Vec<f64> = a.iter().map(|x| x * x).collect();
    let sums = subtree_sums(grid, &sq);
    let sup_form = sums
        .iter()
        .enumerate()
        .map(|(id, s)| s / grid.measure_at(grid.cube(id).level))
        .fold(0.0, f64::max)
        .sqrt();

    let d = grid.d();
    let depth = grid.depth();
    let nl = grid.num_leaves();
    let leaf = grid.leaf_measure();
    // running Σ_{l ≥ k} a²_{I_l(x)}/|I_l| along each leaf's chain
    let mut run = vec![0.0; nl];
    let mut best: f64 = 0.0;
    for k in (0..=depth).rev() {
        let start = grid.level_range(k).start;
        let shift = d * (depth - k);
        let measure = grid.measure_at(k as u32);
        let mut acc = vec![0.0; grid.cubes_at_level(k)];
        for (x, r) in run.iter_mut().enumerate() {
            let local = x >> shift;
            *r += sq[start + local] / measure;
            acc[local] += r.powf(p / 2.0) * leaf;
        }
        for v in acc {
            best = best.max(v / measure);
        }
    }
    Ok(NtvForms { sup_form, lp_form: best.powf(1.0 / p) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cube() {
        let g = Grid::new(1, 5).unwrap();
        let mut a = vec![0.0; g.num_cubes()];
        a[0] = 1.0;
        let f = ntv_scalar_equivalence(&g, &a, 2.0).unwrap();
        assert!((f.sup_form - 1.0).abs() < 1e-15 && (f.lp_form - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_entries() {
        let g = Grid::new(1, 2).unwrap();
        let mut a = vec![0.0; g.num_cubes()];
        a[3] = -1.0;
        assert!(ntv_scalar_equivalence(&g, &a, 2.0).is_err());
    }
}
