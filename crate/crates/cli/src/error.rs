//! Runner errors and their process exit codes.

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] cauchynet::Error),

    #[error("{0}")]
    AllCellsFailed(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// 2 for validation errors, 3 for numerical divergence, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::AllCellsFailed(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                cauchynet::Error::Io(_) => 4,
                e if e.is_numerical() => 3,
                _ => 2,
            },
        }
    }
}
