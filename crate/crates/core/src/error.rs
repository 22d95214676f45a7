use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed input file. `line` is 1-based; for CSV files it is the record row.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("degenerate cohort: {side} score std {sigma:e} below 1e-12")]
    DegenerateCohort { side: &'static str, sigma: f64 },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("unknown utterance '{0}'")]
    UnknownUtterance(String),

    #[error("feature mismatch at position {index}: expected '{expected}', found '{found}'")]
    FeatureMismatch {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
