//! First-order Haar shifts `Q_σ h_I^ε = h_{σ(I)}^{σ(ε)}`.

use dyadic_core::{haar_transform, inverse_haar, Cube, Grid, HaarExpansion, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OperatorError;

/// `σ(I)` is a child of `I`; signatures are relabeled by a fixed map.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftMap {
    grid: Grid,
    child: Vec<usize>,
    sig: Vec<usize>,
}

impl ShiftMap {
    /// `σ(I)` = child `pick(I)` of `I`, signatures fixed.
    pub fn from_child_fn(grid: &Grid, mut pick: impl FnMut(Cube) -> usize) -> Result<Self, OperatorError> {
        let b = grid.branching();
        let mut child = Vec::with_capacity(grid.num_interior());
        for c in grid.interior_cubes() {
            let j = pick(c);
            if j >= b {
                return Err(OperatorError::Shift(format!("child index {j} out of range for {c:?}")));
            }
            child.push(j);
        }
        Ok(ShiftMap { grid: grid.clone(), child, sig: (0..grid.num_signatures()).collect() })
    }

    /// Explicit targets, checked for `σ(I) ⊆ I` and `2ℓ(σ(I)) = ℓ(I)`.
    pub fn from_targets(grid: &Grid, targets: &[Cube]) -> Result<Self, OperatorError> {
        if targets.len() != grid.num_interior() {
            return Err(OperatorError::Shift(format!("{} targets for {} cubes", targets.len(), grid.num_interior())));
        }
        let mut child = Vec::with_capacity(targets.len());
        for (c, t) in grid.interior_cubes().zip(targets) {
            if t.level != c.level + 1 || !grid.contains(c, *t) {
                return Err(OperatorError::Shift(format!("{t:?} is not a child of {c:?}")));
            }
            child.push(grid.child_index(*t));
        }
        Ok(ShiftMap { grid: grid.clone(), child, sig: (0..grid.num_signatures()).collect() })
    }

    pub fn left_child(grid: &Grid) -> Self {
        Self::from_child_fn(grid, |_| 0).expect("child 0 exists")
    }

    pub fn random(grid: &Grid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = grid.branching();
        Self::from_child_fn(grid, |_| rng.random_range(0..b)).expect("in range")
    }

    /// `left-child`, `right-child`, `alternating` or `random:<seed>`.
    pub fn named(grid: &Grid, name: &str) -> Result<Self, OperatorError> {
        let b = grid.branching();
        match name {
            "left-child" => Ok(Self::left_child(grid)),
            "right-child" => Self::from_child_fn(grid, |_| b - 1),
            "alternating" => Self::from_child_fn(grid, |c| if c.level % 2 == 0 { 0 } else { b - 1 }),
            _ => match name.strip_prefix("random:").map(str::parse::<u64>) {
                Some(Ok(seed)) => Ok(Self::random(grid, seed)),
                _ => Err(OperatorError::Shift(format!("unknown shift '{name}'"))),
            },
        }
    }

    /// Replaces the signature relabeling; `map[ε]` is the index of `σ(ε)`.
    pub fn with_signature_map(mut self, map: Vec<usize>) -> Result<Self, OperatorError> {
        let s = self.grid.num_signatures();
        if map.len() != s || map.iter().any(|&m| m >= s) {
            return Err(OperatorError::Shift(format!("signature map {map:?} must send {s} signatures into {s}")));
        }
        self.sig = map;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn target(&self, c: Cube) -> Cube {
        self.grid.child(c, self.child[self.grid.id(c)])
    }

    pub fn signature(&self, eps: usize) -> usize {
        self.sig[eps]
    }

    /// Coefficients of `Qf`; targets at leaf level have no Haar function and are dropped.
    pub fn shift_expansion(&self, e: &HaarExpansion) -> HaarExpansion {
        let g = &self.grid;
        let mut out = HaarExpansion::zeros(g, e.shape());
        let w = e.width();
        for c in g.interior_cubes() {
            let t = self.target(c);
            if g.is_leaf(t) {
                continue;
            }
            let (src, dst) = (g.id(c), g.id(t));
            for eps in 0..g.num_signatures() {
                let se = self.sig[eps];
                for comp in 0..w {
                    let v = e.coeff_by_id(src, eps)[comp];
                    out.coeff_by_id_mut(dst, se)[comp] += v;
                }
            }
        }
        out
    }
}

pub fn apply_haar_shift(sigma: &ShiftMap, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    sigma.grid().check_same(f.grid())?;
    Ok(inverse_haar(&sigma.shift_expansion(&haar_transform(f))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyadic_core::{Shape, Signature};

    #[test]
    fn root_coefficient_moves_to_left_child() {
        let g = Grid::new(1, 4).unwrap();
        let mut e = HaarExpansion::zeros(&g, Shape::Scalar);
        e.coeff_mut(g.root(), Signature::new(0, 1))[0] = 2.5;
        let f = inverse_haar(&e);
        let q = apply_haar_shift(&ShiftMap::left_child(&g), &f).unwrap();
        let out = haar_transform(&q);
        assert_eq!(out.coeff(g.child(g.root(), 0), Signature::new(0, 1)), &[2.5]);
        assert!(q.data()[8..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bad_targets_are_rejected() {
        let g = Grid::new(1, 3).unwrap();
        let mut t: Vec<Cube> = g.interior_cubes().map(|c| g.child(c, 0)).collect();
        t[0] = g.leaf(0);
        assert!(ShiftMap::from_targets(&g, &t).is_err());
        assert!(ShiftMap::named(&g, "sideways").is_err());
    }
}
