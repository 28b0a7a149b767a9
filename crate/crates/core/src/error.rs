// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised anywhere in the detection pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcidError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A 1-based index or interval bound is out of range.
    #[error("index error: {0}")]
    Index(String),
    /// Mutually inconsistent or invalid configuration values.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input data.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl PcidError {
    pub fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub fn index(msg: impl Into<String>) -> Self {
        Self::Index(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// Process exit code used by the command line tool: 1 for I/O and input
    /// parsing failures, 2 for configuration and domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) | Self::Parse { .. } => 1,
            Self::Domain(_) | Self::Index(_) | Self::Config(_) => 2,
        }
    }
}

impl From<std::io::Error> for PcidError {
    fn from(err: std::io::Error) -> Self {
        Self::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PcidError>;
