pub mod cli;
pub mod cs_core;
pub mod error;
pub mod multicast;
pub mod rng;
pub mod scc;
pub mod sdc;
pub mod solver;
pub mod source_model;

pub use error::{Error, Result};
