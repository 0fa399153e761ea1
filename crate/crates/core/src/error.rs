use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("line {line}: predicate {pred} used with arity {found}, previously {expected}")]
    ArityMismatch {
        line: usize,
        pred: String,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { line: usize, value: f64 },

    #[error("line {line}: fact {atom} is not ground")]
    NonGroundFact { line: usize, atom: String },

    #[error("line {line}: duplicate example id {id}")]
    DuplicateExample { line: usize, id: String },

    #[error("line {line}: unknown example wrapper {wrapper} (expected pos or neg)")]
    UnknownWrapper { line: usize, wrapper: String },

    #[error("line {line}: {pred} is reserved")]
    ReservedPredicate { line: usize, pred: String },

    #[error("invalid bias: {0}")]
    Bias(String),

    #[error("invalid clause: {0}")]
    Clause(String),

    #[error("invalid program: {0}")]
    Program(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing facts file for example {id}: {path}")]
    MissingFacts { id: String, path: PathBuf },

    #[error("{0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }

    /// Whether this error stems from malformed input text rather than I/O.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Json(_) => false,
            Error::InFile { source, .. } => source.is_input_error(),
            _ => true,
        }
    }
}
