//! Batch experiment runner behind the `csnet` binary.

mod config;
mod output;
mod run;

pub use config::{
    validate, ExperimentConfig, MatrixChoice, OutputFormat, PolicyChoice, Subcommand,
    TransformChoice, Violation,
};
pub use output::{parse_rows, render, write_rows, ResultRow, SCHEMA_VERSION};
pub use run::{run, RunOutput};
