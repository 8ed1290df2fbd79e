//! IO, file formats and scan orchestration on top of `bandlab-core`.
//!
//! The core crate computes; this crate decides what a run looks like on
//! disk: tabular CSV/JSON reports with a reproducibility header, a JSON
//! container for sampled models, and the parallel Monte Carlo drivers
//! whose output is byte-identical at any worker count.

pub mod cli;
pub mod model_io;
pub mod scan;
pub mod table;

use std::fmt;

/// Errors split by exit code: usage problems exit 1, numerical failures
/// exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bandlab_core::Error> for CliError {
    fn from(e: bandlab_core::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
