use std::path::PathBuf;

use quasi_hermitian::Error as DomainError;

/// Failures surfaced by the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Domain(#[from] DomainError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Validation(_) => 2,
            Self::Invariant(_) => 3,
            Self::Domain(e) => match e {
                DomainError::NonDiagonalizable { .. }
                | DomainError::NoConvergence(_)
                | DomainError::SpectrumOutOfRange { .. }
                | DomainError::NonRealPurity { .. }
                | DomainError::NonRealExpectation { .. }
                | DomainError::FactorsIndefinite { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
