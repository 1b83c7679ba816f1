//! Experiment driver for `qsp-core`: configuration, file formats and the
//! subcommands behind the `qsp` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
