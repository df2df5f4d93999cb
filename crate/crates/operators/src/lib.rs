//! Dyadic operators on vector step functions: paraproducts, Haar multipliers,
//! Haar shifts, commutators, `Π_A`, the weighted square function, and norms
//! on `L^p(W)`.

pub mod big_pi;
pub mod commutator;
pub mod error;
pub mod multiplier;
pub mod norm;
pub mod paraproduct;
pub mod sequence;
pub mod shift;
pub mod square;

pub use big_pi::{apply_big_pi, BigPi};
pub use commutator::{apply_commutator, CommutatorMode};
pub use error::OperatorError;
pub use multiplier::apply_haar_multiplier;
pub use norm::{
    conjugated_matrix, top_singular, weighted_operator_norm, AdjointParaproduct, Commutator, HaarMultiplier, HaarShift, LinearOperator,
    NormKind, NormOptions, NormReport, Paraproduct,
};
pub use paraproduct::{adjoint_paraproduct_with, apply_adjoint_paraproduct, apply_paraproduct, paraproduct_with};
pub use sequence::{MatrixSequence, MatrixSymbol};
pub use shift::{apply_haar_shift, ShiftMap};
pub use square::{square_function, square_function_with, SquareFunction};
