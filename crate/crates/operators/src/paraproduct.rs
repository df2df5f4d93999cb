//! Paraproducts `π_B f = Σ B_I^ε (m_I f) h_I^ε` and their adjoints.

use dyadic_core::{haar_transform, inverse_haar, HaarExpansion, Shape, StepFunction};

use crate::error::OperatorError;
use crate::sequence::{check_vector, mat_vec_acc, MatrixSequence, MatrixSymbol};

/// `Σ A_I^ε (m_I f) h_I^ε` for an arbitrary coefficient sequence.
pub fn paraproduct_with(a: &MatrixSequence, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    let g = a.grid();
    g.check_same(f.grid())?;
    let n = a.n();
    check_vector(f, n)?;
    let means = f.cube_means();
    let mut out = HaarExpansion::zeros(g, Shape::Vector(n));
    for c in g.interior_cubes() {
        let id = g.id(c);
        let m = &means[id * n..(id + 1) * n];
        for eps in 0..g.num_signatures() {
            mat_vec_acc(a.slot(id, eps), m, 1.0, out.coeff_by_id_mut(id, eps));
        }
    }
    Ok(inverse_haar(&out))
}

pub fn apply_paraproduct(b: &MatrixSymbol, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    paraproduct_with(b.coefficients(), f)
}

/// `Σ A_I^ε f_I^ε χ_I / |I|`.
pub fn adjoint_paraproduct_with(a: &MatrixSequence, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    let g = a.grid();
    g.check_same(f.grid())?;
    let n = a.n();
    check_vector(f, n)?;
    let e = haar_transform(f);
    // value carried by each cube, pushed down to the leaves afterwards
    let mut level_vals = vec![0.0; g.num_cubes() * n];
    for c in g.interior_cubes() {
        let id = g.id(c);
        let inv = 1.0 / g.measure_at(c.level);
        let slot = &mut level_vals[id * n..(id + 1) * n];
        for eps in 0..g.num_signatures() {
            mat_vec_acc(a.slot(id, eps), e.coeff_by_id(id, eps), inv, slot);
        }
    }
    let b = g.branching();
    for k in 1..=g.depth() {
        let start = g.level_range(k).start;
        let pstart = g.level_range(k - 1).start;
        for local in 0..g.cubes_at_level(k) {
            let parent = pstart + local / b;
            for comp in 0..n {
                level_vals[(start + local) * n + comp] += level_vals[parent * n + comp];
            }
        }
    }
    let leaf_start = g.level_range(g.depth()).start * n;
    Ok(StepFunction::from_data(g, Shape::Vector(n), level_vals[leaf_start..].to_vec())?)
}

/// `(π_{B*})* f = Σ B_I^ε f_I^ε χ_I / |I|`.
pub fn apply_adjoint_paraproduct(b: &MatrixSymbol, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    adjoint_paraproduct_with(b.coefficients(), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyadic_core::{haar_value, Grid, Signature};
    use nalgebra::DMatrix;

    #[test]
    fn constant_symbol_gives_zero() {
        let g = Grid::new(1, 4).unwrap();
        let b = MatrixSymbol::new(StepFunction::constant(&g, Shape::Matrix(2), &[1.0, 2.0, 3.0, 4.0])).unwrap();
        let f = StepFunction::from_fn(&g, Shape::Vector(2), |j, o| o.copy_from_slice(&[j as f64, 1.0]));
        assert!(apply_paraproduct(&b, &f).unwrap().data().iter().all(|v| v.abs() < 1e-14));
        assert!(apply_adjoint_paraproduct(&b, &f).unwrap().data().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn single_root_term() {
        let g = Grid::new(1, 3).unwrap();
        let root = g.root();
        let h = StepFunction::from_fn(&g, Shape::Scalar, |j, o| o[0] = haar_value(&g, root, Signature::new(0, 1), j));
        let b = MatrixSymbol::scalar_times(&h, &DMatrix::identity(2, 2)).unwrap();
        let e = [0.3, -1.2];
        let f = StepFunction::constant(&g, Shape::Vector(2), &e);
        let out = apply_paraproduct(&b, &f).unwrap();
        for j in 0..g.num_leaves() {
            for c in 0..2 {
                assert!((out.leaf(j)[c] - e[c] * h.leaf(j)[0]).abs() < 1e-14);
            }
        }
        // (π_{B*})* h = B_root χ / |root|
        let hv = StepFunction::from_fn(&g, Shape::Vector(2), |j, o| o.copy_from_slice(&[h.leaf(j)[0], 0.0]));
        let adj = apply_adjoint_paraproduct(&b, &hv).unwrap();
        for j in 0..g.num_leaves() {
            assert!((adj.leaf(j)[0] - 1.0).abs() < 1e-14 && adj.leaf(j)[1].abs() < 1e-14);
        }
    }
}
