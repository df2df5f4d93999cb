//! Carleson conditions for matrix sequences, weighted BMO norms of matrix
//! symbols, the decaying stopping time, and the scalar NTV equivalence.

pub mod bmo;
pub mod carleson;
pub mod embedding;
pub mod error;
pub mod ntv;
pub mod stopping;

pub use bmo::{bmo_norm, bmo_with, comparability_constant, cube_oscillation, oscillation_about, shifted_grid_bmo, BmoVariant, CubeOscillation, ShiftedBmo};
pub use carleson::{
    carleson_b_from_table, carleson_b_sup, carleson_c_constant, carleson_c_from_table, carleson_report, subtree_matrix_sums, CarlesonC,
    CarlesonReport, SupReport,
};
pub use embedding::{carleson_embedding_p2, EmbeddingCheck};
pub use error::CarlesonError;
pub use ntv::{ntv_scalar_equivalence, NtvForms};
pub use stopping::{default_stopping_tree, stopping_constants, stopping_time_tree, Generation, StoppingConstants, StoppingTree, Thresholds};
