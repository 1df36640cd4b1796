use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Statistical failures (a decoder returning the wrong message, a receiver
/// that cannot invert its transfer matrix inside a Monte-Carlo loop) are
/// reported as data in the result types, not through this enum.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("measurement count m = {m} exceeds n = {n}; sparsity too weak for rho = {rho}")]
    PlanExceedsLength { m: usize, n: usize, rho: f64 },

    #[error("linear system is infeasible: {0}")]
    Infeasible(String),

    #[error("enumeration cap exceeded: {count} candidates > cap {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("no consistent support of size <= {k_max}")]
    NoConsistentSupport { k_max: usize },

    #[error("rank deficient: rank {rank} < {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("restricted isometry regime check failed: {0}")]
    RipRegime(String),

    #[error("index {index} out of range 0..{len}")]
    OutOfRange { index: usize, len: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
