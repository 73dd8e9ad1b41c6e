//! Experiment runner around `chenfliess-core`: config-driven Monte Carlo
//! experiments with deterministic CSV/JSON artifacts and a worker pool whose
//! size never changes the output bytes.

use std::fmt;

pub mod catalog;
pub mod config;
pub mod formats;
pub mod runner;

/// Error type for config, IO, and experiment failures.
#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn new(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

impl From<chenfliess_core::Error> for CliError {
    fn from(e: chenfliess_core::Error) -> Self {
        CliError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
