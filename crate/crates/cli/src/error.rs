use std::fmt;
use std::io;

use thiserror::Error;

/// Failures of the command-line driver, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid {key}: {msg}")]
    Validation { key: String, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error("numeric failure: {0}")]
    Numeric(#[from] collapse_core::Error),

    /// Validation checks ran but at least one failed.
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn validation(key: impl Into<String>, msg: impl fmt::Display) -> Self {
        CliError::Validation {
            key: key.into(),
            msg: msg.to_string(),
        }
    }

    pub fn io(path: impl fmt::Display, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Io { .. } => 2,
            CliError::Numeric(_) => 3,
        }
    }

    /// Short tag naming the failure class, used as the first field of the
    /// diagnostic line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Io { .. } => "io",
            CliError::Numeric(_) => "numeric",
            CliError::ChecksFailed { .. } => "checks",
        }
    }

    /// One diagnostic line: `error kind=<kind>: <message>` with any line
    /// breaks in the message flattened.
    pub fn diagnostic(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error kind={}: {msg}", self.kind())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
