//! Sparse signals, measurement matrices, measurement budgets and empirical
//! restricted-isometry constants.

mod entropy;
mod matrix;
mod plan;
mod rip;
mod signal;

pub use entropy::{binary_entropy, shannon_entropy};
pub(crate) use entropy::hb;
pub use matrix::{measure, read_rows, write_vector_text, MatrixKind, MeasurementMatrix};
pub use plan::{plan_dimensions, DimensionPlan, DEFAULT_RHO};
pub use rip::{
    binomial, estimate_rip_constant, rip_subsets, subset_deviation, Combinations, RipEstimate,
    EXHAUSTIVE_CAP,
};
pub use signal::{bounded_noise, generate_sparse_signal, SparseVector, SupportLaw, ValueLaw};
pub(crate) use signal::generate_with_rng;
