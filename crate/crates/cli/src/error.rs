use bimlab::{Error, FormatError};
use thiserror::Error;

/// Exit codes are a scripting contract: 0 success, 1 usage or config,
/// 2 input/output, 3 numerical failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("parity check failed: max relative error {max:.3e} exceeds {tolerance:.1e}")]
    Parity { max: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parity { .. } => 3,
            CliError::Core(e) => match e {
                Error::Config(_) | Error::Contract(_) | Error::Domain(_) => 1,
                Error::Format(FormatError::HashMismatch { .. }) => 1,
                Error::Format(_) | Error::Io { .. } | Error::Json(_) => 2,
                Error::Numerical(_) => 3,
            },
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
