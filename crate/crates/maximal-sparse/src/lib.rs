//! Matrix weighted maximal functions and sparse operators on dyadic grids.

pub mod error;
pub mod maximal;
pub mod sparse;

pub use error::MaximalError;
pub use maximal::{
    local_nq, local_nq_with, maximal_mw, maximal_mw_detail, maximal_mw_prime, maximal_mw_with, maximal_prime_p2, maximal_prime_reducing, mw_proof_chain, prime_averages, weak_type_22,
    ChainViolations, LocalNq, MwChain, MwChainPoint, MwValue, WeakTypeReport,
};
pub use sparse::{sparse_apply, sparse_chain, sparse_generate, SparseCertificate, SparseChain, SparseCube, SparseFamily, SparseOperator};
