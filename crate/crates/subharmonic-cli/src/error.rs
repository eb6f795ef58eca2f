//! Command line error type with stable machine-readable codes.

use thiserror::Error;

/// Anything that can go wrong between flag parsing and report writing.
#[derive(Debug, Error)]
pub enum CliError {
    /// A library-level failure; the code passes through unchanged.
    #[error("{0}")]
    Lib(#[from] subharmonic::Error),
    /// Filesystem problem on an input or output path.
    #[error("{path}: {message}")]
    Io {
        /// Path the operation touched.
        path: String,
        /// Operating system message.
        message: String,
    },
    /// A CSV cell or row that cannot be interpreted.
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        /// Input file the cell came from.
        path: String,
        /// One-based file row (the header is row 1).
        row: usize,
        /// Column name, or its one-based position when unnamed.
        column: String,
        /// What was wrong with the cell.
        message: String,
    },
    /// An input with headers but no data rows, or no content at all.
    #[error("{path}: no data rows")]
    EmptyFile {
        /// Offending input path.
        path: String,
    },
    /// A flag value that parses as text but names nothing valid.
    #[error("{message}")]
    BadFlag {
        /// Explanation, naming the flag.
        message: String,
    },
}

impl CliError {
    /// Stable error code for machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Lib(inner) => inner.code(),
            CliError::Io { .. } => "IoError",
            CliError::Parse { .. } => "ParseError",
            CliError::EmptyFile { .. } => "EmptyFile",
            CliError::BadFlag { .. } => "BadFlag",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
