//! Front end for the `carleman` binary: JSON run configuration, CSV
//! ingestion and the `kernel-eval`, `verify`, `reconstruct` and
//! `decay-report` commands.

pub mod commands;
pub mod config;
pub mod error;

pub use error::{CliError, CliResult};
