//! Tensor Haar expansions on a truncated grid.
//!
//! `h_I^ε` is `|I|^{-1/2}` times a sign on each child of `I`, so every
//! coefficient is a signed combination of child averages. The coarse mean on
//! the root is stored separately; together with the coefficients on levels
//! `< L` it determines the leaf values exactly.

use std::io::Write;

use crate::error::DyadicError;
use crate::grid::{Cube, Grid};
use crate::signature::Signature;
use crate::step::{Shape, StepFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct HaarExpansion {
    grid: Grid,
    shape: Shape,
    mean: Vec<f64>,
    coeffs: Vec<f64>,
}

impl HaarExpansion {
    pub fn zeros(grid: &Grid, shape: Shape) -> Self {
        let w = shape.width();
        HaarExpansion {
            grid: grid.clone(),
            shape,
            mean: vec![0.0; w],
            coeffs: vec![0.0; grid.num_interior() * grid.num_signatures() * w],
        }
    }

    /// Assembles an expansion from raw parts, checking that every coefficient is present.
    pub fn from_parts(grid: &Grid, shape: Shape, mean: Vec<f64>, coeffs: Vec<f64>) -> Result<Self, DyadicError> {
        let w = shape.width();
        let expected = grid.num_interior() * grid.num_signatures() * w;
        if mean.len() != w {
            return Err(DyadicError::Shape { expected: format!("mean of width {w}"), got: format!("{}", mean.len()) });
        }
        if coeffs.len() != expected {
            return Err(DyadicError::Incomplete { expected, found: coeffs.len() });
        }
        Ok(HaarExpansion { grid: grid.clone(), shape, mean, coeffs })
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

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean_mut(&mut self) -> &mut [f64] {
        &mut self.mean
    }

    pub fn raw(&self) -> &[f64] {
        &self.coeffs
    }

    fn offset(&self, c: Cube, eps: Signature) -> usize {
        debug_assert!((c.level as usize) < self.grid.depth());
        debug_assert!(eps.is_cancellative());
        (self.grid.id(c) * self.grid.num_signatures() + eps.index()) * self.width()
    }

    pub fn coeff(&self, c: Cube, eps: Signature) -> &[f64] {
        let o = self.offset(c, eps);
        &self.coeffs[o..o + self.width()]
    }

    pub fn coeff_mut(&mut self, c: Cube, eps: Signature) -> &mut [f64] {
        let o = self.offset(c, eps);
        let w = self.width();
        &mut self.coeffs[o..o + w]
    }

    /// Coefficient slot by cube id and signature index.
    pub fn coeff_by_id(&self, id: usize, eps: usize) -> &[f64] {
        let w = self.width();
        let o = (id * self.grid.num_signatures() + eps) * w;
        &self.coeffs[o..o + w]
    }

    pub fn coeff_by_id_mut(&mut self, id: usize, eps: usize) -> &mut [f64] {
        let w = self.width();
        let o = (id * self.grid.num_signatures() + eps) * w;
        &mut self.coeffs[o..o + w]
    }

    /// `Σ |f_I^ε|² + |Q_0| |m f|²`.
    pub fn energy(&self) -> f64 {
        let c: f64 = self.coeffs.iter().map(|a| a * a).sum();
        c + self.mean.iter().map(|a| a * a).sum::<f64>()
    }

    /// Writes rows `level, offset_0.., signature, c_0..` as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let d = self.grid.d();
        let w = self.width();
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["level".to_string()];
        header.extend((0..d).map(|i| format!("offset_{i}")));
        header.push("signature".into());
        header.extend((0..w).map(|i| format!("c{i}")));
        wtr.write_record(&header)?;
        for c in self.grid.interior_cubes() {
            let m = self.grid.offsets(c);
            for eps in Signature::cancellative(d) {
                let mut row = vec![c.level.to_string()];
                row.extend(m.iter().map(|x| x.to_string()));
                row.push(eps.label());
                row.extend(self.coeff(c, eps).iter().map(|x| format!("{x:.17e}")));
                wtr.write_record(&row)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Value of `h_I^ε` on leaf `j` (zero off `I`).
pub fn haar_value(grid: &Grid, c: Cube, eps: Signature, j: usize) -> f64 {
    let leaf = grid.leaf(j);
    if !grid.contains(c, leaf) || grid.is_leaf(c) {
        return 0.0;
    }
    let child = grid.ancestor(leaf, c.level + 1);
    eps.sign_on_child(grid.child_index(child)) / grid.measure_at(c.level).sqrt()
}

/// Forward transform: coarse mean and all `f_I^ε = ∫ f h_I^ε`.
pub fn haar_transform(f: &StepFunction) -> HaarExpansion {
    let g = f.grid();
    let w = f.width();
    let means = f.cube_means();
    let mut e = HaarExpansion::zeros(g, f.shape());
    e.mean.copy_from_slice(&means[..w]);
    let b = g.branching();
    let scale_base = 1.0 / b as f64;
    let sigs: Vec<Signature> = Signature::cancellative(g.d()).collect();
    for k in 0..g.depth() {
        let s = g.measure_at(k as u32).sqrt() * scale_base;
        let child_start = g.level_range(k + 1).start;
        for (local, id) in g.level_range(k).enumerate() {
            for eps in &sigs {
                let slot = e.coeff_by_id_mut(id, eps.index());
                for (comp, out) in slot.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..b {
                        acc += eps.sign_on_child(j) * means[(child_start + local * b + j) * w + comp];
                    }
                    *out = s * acc;
                }
            }
        }
    }
    e
}

/// Inverse transform: `m f + Σ f_I^ε h_I^ε` evaluated on the leaves.
pub fn inverse_haar(e: &HaarExpansion) -> StepFunction {
    let g = e.grid();
    let w = e.width();
    let b = g.branching();
    let sigs: Vec<Signature> = Signature::cancellative(g.d()).collect();
    // values on the current level, cube-local order
    let mut cur = e.mean.clone();
    for k in 0..g.depth() {
        let inv = 1.0 / g.measure_at(k as u32).sqrt();
        let n_here = g.cubes_at_level(k);
        let mut next = vec![0.0; n_here * b * w];
        for local in 0..n_here {
            let id = g.level_range(k).start + local;
            for j in 0..b {
                for comp in 0..w {
                    let mut v = cur[local * w + comp];
                    for eps in &sigs {
                        v += e.coeff_by_id(id, eps.index())[comp] * eps.sign_on_child(j) * inv;
                    }
                    next[(local * b + j) * w + comp] = v;
                }
            }
        }
        cur = next;
    }
    StepFunction::from_data(g, e.shape(), cur).expect("leaf count matches grid")
}
