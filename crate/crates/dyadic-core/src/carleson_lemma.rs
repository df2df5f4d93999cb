//! Scalar Carleson sequences: chain maxima and the Carleson lemma.

use crate::grid::Grid;
use crate::step::{Shape, StepFunction};

/// `a*(x) = max_{I ∋ x} a_I` for a sequence indexed by cube id over levels `0..=L`.
pub fn sequence_maximal(grid: &Grid, a: &[f64]) -> StepFunction {
    assert_eq!(a.len(), grid.num_cubes(), "sequence must cover every cube");
    let b = grid.branching();
    let mut cur = vec![a[0]];
    for k in 1..=grid.depth() {
        let start = grid.level_range(k).start;
        let mut next = vec![0.0; grid.cubes_at_level(k)];
        for (local, v) in next.iter_mut().enumerate() {
            *v = cur[local / b].max(a[start + local]);
        }
        cur = next;
    }
    StepFunction::from_data(grid, Shape::Scalar, cur).expect("leaf count")
}

/// Sums of a per-cube sequence over every subtree `D(J)`, indexed by cube id.
pub fn subtree_sums(grid: &Grid, lambda: &[f64]) -> Vec<f64> {
    assert_eq!(lambda.len(), grid.num_cubes());
    let mut s = lambda.to_vec();
    let b = grid.branching();
    for k in (0..grid.depth()).rev() {
        let child_start = grid.level_range(k + 1).start;
        for (local, id) in grid.level_range(k).enumerate() {
            let extra: f64 = (0..b).map(|j| s[child_start + local * b + j]).sum();
            s[id] += extra;
        }
    }
    s
}

/// `sup_J |J|^{-1} Σ_{I ⊆ J} λ_I` and the id of a maximizing cube.
pub fn carleson_constant(grid: &Grid, lambda: &[f64]) -> (f64, usize) {
    let sums = subtree_sums(grid, lambda);
    let mut best = (f64::NEG_INFINITY, 0);
    for (id, s) in sums.iter().enumerate() {
        let v = s / grid.measure_at(grid.cube(id).level);
        if v > best.0 {
            best = (v, id);
        }
    }
    best
}

/// Both sides of `Σ a_I λ_I ≤ C ∫ a*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlesonLemmaSides {
    pub lhs: f64,
    pub constant: f64,
    pub integral_of_maximal: f64,
}

impl CarlesonLemmaSides {
    pub fn rhs(&self) -> f64 {
        self.constant * self.integral_of_maximal
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs() * (1.0 + rel_tol) + 1e-300
    }
}

pub fn carleson_lemma(grid: &Grid, lambda: &[f64], a: &[f64]) -> CarlesonLemmaSides {
    let lhs = lambda.iter().zip(a).map(|(l, x)| l * x).sum();
    let (constant, _) = carleson_constant(grid, lambda);
    let star = sequence_maximal(grid, a);
    let integral_of_maximal = star.data().iter().sum::<f64>() * grid.leaf_measure();
    CarlesonLemmaSides { lhs, constant, integral_of_maximal }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence_has_constant_maximal() {
        let g = Grid::new(2, 3).unwrap();
        let s = sequence_maximal(&g, &vec![1.0; g.num_cubes()]);
        assert!(s.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn root_only_sequence() {
        let g = Grid::new(1, 4).unwrap();
        let mut a = vec![0.0; g.num_cubes()];
        a[0] = 3.0;
        let s = sequence_maximal(&g, &a);
        assert!(s.data().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn carleson_constant_of_root_mass() {
        let g = Grid::new(1, 3).unwrap();
        let mut l = vec![0.0; g.num_cubes()];
        l[0] = 1.0;
        assert_eq!(carleson_constant(&g, &l), (1.0, 0));
    }
}
