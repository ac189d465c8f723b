use std::fmt::Display;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or arguments. Exit code 1.
    #[error("usage: {0}")]
    Usage(String),
    /// Unreadable or inconsistent input data. Exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn usage(msg: impl Display) -> CliError {
        CliError::Usage(msg.to_string())
    }

    pub fn data(msg: impl Display) -> CliError {
        CliError::Data(msg.to_string())
    }

    pub fn in_file(path: &Path, msg: impl Display) -> CliError {
        CliError::Data(format!("{}: {msg}", path.display()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
