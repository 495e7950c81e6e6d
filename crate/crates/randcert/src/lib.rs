//! Batch front end: bound curves, comparison datasets, optimizer tables,
//! extremal scans and the acceptance suite, written as CSV or JSON with a
//! provenance header.

pub mod acceptance;
pub mod behavior_io;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};
