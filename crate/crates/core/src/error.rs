use thiserror::Error;

/// Errors produced by every fallible operation in this crate.
///
/// `code()` returns the short machine-readable name used on the CLI's
/// `FAIL reason=<code>` line.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("bad subspace: {0}")]
    BadSubspace(String),

    #[error("bad wire: {0}")]
    BadWire(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("matrix acts outside subspace {j},{k} (max deviation {deviation:e})")]
    NotSubspaceConfined { j: usize, k: usize, deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("reconstruction residual {residual:e} exceeds {limit:e}")]
    ReconstructionFailed { residual: f64, limit: f64 },

    #[error("dimension {d} exceeds the supported limit {limit}")]
    TooLarge { d: usize, limit: usize },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimMismatch(_) => "DimMismatch",
            Error::BadDimension(_) => "BadDimension",
            Error::BadSubspace(_) => "BadSubspace",
            Error::BadWire(_) => "BadWire",
            Error::Parse { .. } => "ParseError",
            Error::NotSubspaceConfined { .. } => "NotSubspaceConfined",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::ReconstructionFailed { .. } => "ReconstructionFailed",
            Error::TooLarge { .. } => "TooLarge",
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
