//! Error type shared across the crate.
//!
//! Data errors carry enough coordinates to locate the offending value; all
//! observation/dimension/point indices in messages are 1-based, matching the
//! indexing used in reports and labels files.

use std::path::PathBuf;

/// Everything that can go wrong while validating, reading, or analyzing data.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A sample needs at least two curves for band counts to exist.
    #[error("sample has {n} curve(s); at least 2 are required")]
    TooFewCurves { n: usize },

    /// Rows of a sample must share one grid.
    #[error("row {row} has {got} points but the sample grid has {expected}")]
    RaggedSample { row: usize, got: usize, expected: usize },

    /// A sample value was NaN or infinite (observation/point are 1-based).
    #[error("non-finite value {value} at observation {observation}, point {point}")]
    NonFiniteSample {
        observation: usize,
        point: usize,
        value: f64,
    },

    /// A dataset value was NaN or infinite (all coordinates 1-based).
    #[error(
        "non-finite value {value} at observation {observation}, \
         dimension {dimension}, point {point}"
    )]
    NonFiniteData {
        observation: usize,
        dimension: usize,
        point: usize,
        value: f64,
    },

    /// Dataset dimensions do not fit together.
    #[error("shape error: {0}")]
    Shape(String),

    /// A configuration value is out of its documented range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Integer accumulators would overflow for this (n, p, N); reject up front
    /// rather than produce silently wrapped counts.
    #[error("accumulator overflow risk: {0}")]
    Overflow(String),

    /// Malformed dataset file (bad magic, truncated payload, ...).
    #[error("invalid dataset file {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Malformed CSV cell or row during import.
    #[error("CSV error in {path}, row {row}, column {column}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    /// I/O failure with the path that was being touched.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Covariance factorization failed even after jitter.
    #[error("noise covariance factorization failed: {0}")]
    Factorization(String),
}

impl Error {
    /// Attaches a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
