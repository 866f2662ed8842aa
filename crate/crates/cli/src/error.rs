//! Command-line failures and their exit codes.

use mdi_core::{MatrixError, ProblemError, SolveError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid problem: {0}")]
    Problem(#[from] ProblemError),
    #[error("invalid subarc matrix: {0}")]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("verdict: {0}")]
    NotStationary(String),
}

impl CliError {
    /// 2 for unusable input, 3 when the solver found nothing, 4 for a failed audit.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Problem(_) | CliError::Matrix(_) | CliError::Invalid(_) => 2,
            CliError::Solve(SolveError::InvalidConfig(_) | SolveError::Problem(_) | SolveError::Matrix(_)) => 2,
            CliError::Solve(SolveError::NoSolutionFound) => 3,
            CliError::Solve(_) => 1,
            CliError::NotStationary(_) => 4,
        }
    }
}
