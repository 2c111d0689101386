//! File formats, configuration handling and parallel drivers behind the
//! `mirror-sqkd` command-line tool.

#![deny(unsafe_code)]
#![warn(missing_docs)]

pub mod config;
pub mod output;
pub mod parallel;

use std::path::PathBuf;

/// Errors from reading inputs or writing outputs.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    /// A file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// A JSON document did not parse.
    #[error("{path}: {source}")]
    Json {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: serde_json::Error,
    },
    /// CSV serialization failed.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// Rejected by the model.
    #[error(transparent)]
    Model(#[from] mirror_core::Error),
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, ToolError>;
