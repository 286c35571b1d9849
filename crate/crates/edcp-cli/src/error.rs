use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, parameters or input files; nothing was written.
    #[error("invalid {flag}: {msg}")]
    Validation { flag: &'static str, msg: String },
    #[error("schema mismatch in {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error(transparent)]
    Edcp(#[from] edcp::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } | CliError::Schema { .. } => 2,
            _ => 1,
        }
    }

    pub fn invalid(flag: &'static str, msg: impl Into<String>) -> Self {
        CliError::Validation {
            flag,
            msg: msg.into(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
