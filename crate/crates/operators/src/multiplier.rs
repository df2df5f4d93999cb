//! Haar multipliers `T_A f = Σ A_I^ε f_I^ε h_I^ε`.

use dyadic_core::{haar_transform, inverse_haar, HaarExpansion, Shape, StepFunction};

use crate::error::OperatorError;
use crate::sequence::{check_vector, mat_vec_acc, MatrixSequence};

pub fn apply_haar_multiplier(a: &MatrixSequence, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    let g = a.grid();
    g.check_same(f.grid())?;
    let n = a.n();
    check_vector(f, n)?;
    let e = haar_transform(f);
    let mut out = HaarExpansion::zeros(g, Shape::Vector(n));
    for id in 0..g.num_interior() {
        for eps in 0..g.num_signatures() {
            mat_vec_acc(a.slot(id, eps), e.coeff_by_id(id, eps), 1.0, out.coeff_by_id_mut(id, eps));
        }
    }
    Ok(inverse_haar(&out))
}
