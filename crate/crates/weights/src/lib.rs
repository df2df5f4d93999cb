//! Matrix weights on dyadic grids: cell averages, reducing operators, `A_p`
//! characteristics, duality and truncation.

pub mod ap;
pub mod ellipsoid;
pub mod error;
pub mod linalg;
pub mod reducing;
pub mod weight;

pub use ap::{ap_characteristic, ap_from_table, double_averages, ApReport, ApRow};
pub use error::WeightError;
pub use reducing::{dual_gauge, gauge, reducing_operators, reducing_table, Certificate, ReducingOptions, ReducingPair, ReducingTable};
pub use weight::{conjugate, dual_weight, power_interval_mean, truncate_weight, LeafWeights, MatrixWeight, PowerProfile};
