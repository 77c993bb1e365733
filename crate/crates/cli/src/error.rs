//! Error taxonomy mapped onto the frozen exit-code contract:
//! 0 ok, 2 usage/config, 3 I/O, 4 numeric.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid config key `{key}`: {message}")]
    ConfigKey { key: String, message: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: parse error at line {line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigKey { .. } | CliError::Format { .. } => 2,
            CliError::Read { .. } | CliError::Write { .. } => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn key(key: &str, message: impl std::fmt::Display) -> Self {
        CliError::ConfigKey { key: key.to_string(), message: message.to_string() }
    }
}
