//! Dyadic grids, tensor Haar systems and scalar Carleson tools on finite trees.
//!
//! Everything here is exact up to floating point round-off: cubes are
//! integer-addressed, Haar functions are signed multiples of `|I|^{-1/2}` on
//! children, and the coarse mean is kept so that Parseval closes on a tree of
//! finite depth.

pub mod carleson_lemma;
pub mod covering;
pub mod error;
pub mod grid;
pub mod haar;
pub mod signature;
pub mod step;

pub use carleson_lemma::{carleson_constant, carleson_lemma, sequence_maximal, subtree_sums, CarlesonLemmaSides};
pub use covering::{find_covering_cube, RationalCube, ShiftedCube};
pub use error::DyadicError;
pub use grid::{Cube, Grid, GridSpec, Shift};
pub use haar::{haar_transform, haar_value, inverse_haar, HaarExpansion};
pub use signature::{signature_product, Signature, SignatureProduct};
pub use step::{Shape, StepFunction};
