use std::path::PathBuf;

use qualia_core::substrate::SubstrateError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const CAP: u8 = 3;
    pub const VALIDATION: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error("{path}:{source}")]
    Predicate { path: String, source: qualia_core::predicate::ParseError },
    #[error(transparent)]
    Core(#[from] qualia_core::Error),
    #[error("{failed} validation check(s) failed\n{report}")]
    Validation { failed: usize, report: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Core(qualia_core::Error::Substrate(SubstrateError::CapExceeded { .. })) => exit::CAP,
            CliError::Config(_) | CliError::Predicate { .. } | CliError::Core(_) => exit::CONFIG,
            CliError::Validation { .. } => exit::VALIDATION,
        }
    }
}

impl From<SubstrateError> for CliError {
    fn from(e: SubstrateError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<qualia_core::weights::WeightError> for CliError {
    fn from(e: qualia_core::weights::WeightError) -> Self {
        CliError::Core(e.into())
    }
}
