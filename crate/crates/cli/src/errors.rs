//! Error taxonomy for the command-line surface.
//!
//! Every failure is classified as either an *input* problem (unreadable or
//! malformed files, inconsistent datasets, bad configuration) or a
//! *numerical* problem (a solver reporting failure), because the process
//! exit code is part of the public contract: `0` success, `2` input error,
//! `3` numerical error.

use std::path::Path;

/// `2` for input errors, `3` for numerical errors (see [`CliError::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// An input error annotated with the file it concerns.
    pub fn input_at(path: &Path, message: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {}", path.display(), message))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Extension hooks for pulling library and IO results into the CLI error
/// taxonomy with a one-word classification at the call site.
pub trait Classify<T> {
    /// Treat a failure as malformed/unusable input (exit 2).
    fn input(self, context: &str) -> Result<T>;
    /// Treat a failure as a numerical/solver problem (exit 3).
    fn numerical(self, context: &str) -> Result<T>;
}

impl<T, E: std::fmt::Display> Classify<T> for std::result::Result<T, E> {
    fn input(self, context: &str) -> Result<T> {
        self.map_err(|e| CliError::Input(format!("{context}: {e}")))
    }

    fn numerical(self, context: &str) -> Result<T> {
        self.map_err(|e| CliError::Numerical(format!("{context}: {e}")))
    }
}
