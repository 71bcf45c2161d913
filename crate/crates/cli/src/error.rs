use std::path::PathBuf;

use kerrlaw::photonic::GridParseError;
use kerrlaw::KerrError;
use thiserror::Error;

use crate::device::ParseError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("{}: {source}", path.display())]
    Grid { path: PathBuf, source: GridParseError },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Kernel { context: String, source: KerrError },

    #[error("{0}")]
    Acceptance(String),
}

impl CliError {
    pub fn kernel(context: impl Into<String>, source: KerrError) -> Self {
        CliError::Kernel {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Grid { .. } | CliError::Io { .. } | CliError::Usage(_) => EXIT_INPUT,
            // a kernel rejecting its inputs is a validation failure, not a numerical one
            CliError::Kernel {
                source: KerrError::Domain(_) | KerrError::Shape(_),
                ..
            } => EXIT_INPUT,
            CliError::Kernel { .. } => EXIT_NUMERICAL,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
