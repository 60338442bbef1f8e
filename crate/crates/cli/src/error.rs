use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid value for `{key}`: {reason}")]
    Param { key: String, reason: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] fwlab_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn param(key: &str, reason: String) -> Self {
        CliError::Param {
            key: key.to_string(),
            reason,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Bad input maps to 2, solver breakdowns and I/O failures to 3.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

impl From<fwlab_core::waves::WaveError> for CliError {
    fn from(e: fwlab_core::waves::WaveError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<fwlab_core::diagnostics::DiagnosticsError> for CliError {
    fn from(e: fwlab_core::diagnostics::DiagnosticsError) -> Self {
        CliError::Core(e.into())
    }
}
