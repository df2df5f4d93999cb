//! Weighted dyadic square function `(Σ_{I∋x} Σ_ε |(m_I W)^{1/2} f_I^ε|² / |I|)^{1/2}`.

use dyadic_core::{haar_transform, Shape, StepFunction};
use weights::{reducing_table, MatrixWeight, ReducingOptions, ReducingTable};

use crate::error::OperatorError;
use crate::sequence::check_vector;

#[derive(Clone, Debug)]
pub struct SquareFunction {
    pub pointwise: StepFunction,
    /// `Σ_{I,ε} |(m_I W)^{1/2} f_I^ε|² = ∫ S(x)²`.
    pub aggregate: f64,
}

/// Uses the `p = 2` reducing operators `V_I = (m_I W)^{1/2}` from `table`.
pub fn square_function_with(table: &ReducingTable, f: &StepFunction) -> Result<SquareFunction, OperatorError> {
    if table.p() != 2.0 {
        return Err(OperatorError::Shape(format!("square function needs p = 2 reducing operators, got p = {}", table.p())));
    }
    let g = table.grid();
    g.check_same(f.grid())?;
    let n = table.n();
    check_vector(f, n)?;
    let e = haar_transform(f);
    let mut per_cube = vec![0.0; g.num_cubes()];
    let mut aggregate = 0.0;
    for c in g.interior_cubes() {
        let id = g.id(c);
        let v = table.v(c);
        let mut s = 0.0;
        for eps in 0..g.num_signatures() {
            let x = nalgebra::DVector::from_column_slice(e.coeff_by_id(id, eps));
            s += (v * x).norm_squared();
        }
        aggregate += s;
        per_cube[id] = s / g.measure_at(c.level);
    }
    let pointwise = StepFunction::from_fn(g, Shape::Scalar, |j, out| {
        out[0] = g.chain(j).map(|c| per_cube[g.id(c)]).sum::<f64>().sqrt();
    });
    Ok(SquareFunction { pointwise, aggregate })
}

pub fn square_function(w: &MatrixWeight, f: &StepFunction) -> Result<SquareFunction, OperatorError> {
    let table = reducing_table(w, f.grid(), 2.0, &ReducingOptions::default())?;
    square_function_with(&table, f)
}
