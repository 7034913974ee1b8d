//! Experiment harness for the `leaper` binary: configuration, dispatch and
//! run outputs.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, RunReport};
pub use config::{validate_config, validate_table, ExperimentConfig};
