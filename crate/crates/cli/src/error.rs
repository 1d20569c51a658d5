use std::path::PathBuf;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

impl From<dct_shield::Error> for CliError {
    fn from(err: dct_shield::Error) -> Self {
        use dct_shield::Error as E;
        match err {
            E::Io { path, source } => CliError::io(path, source),
            E::Format(_) | E::Unsupported(_) | E::TooSmall { .. } | E::Csv(_) => CliError::Io {
                path: PathBuf::new(),
                message: err.to_string(),
            },
            E::Quality(_) | E::InvalidParameter(_) | E::InvalidStep(_) => {
                CliError::Usage(err.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
