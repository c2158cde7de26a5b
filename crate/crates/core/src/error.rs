use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{what} is limited to {limit} qubits, got {requested}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("observable is not diagonal (contains X or Y terms)")]
    NotDiagonal,

    #[error("invalid qubit index {index} for a {n_qubits}-qubit register")]
    InvalidQubit { index: usize, n_qubits: usize },

    #[error("gate targets must be distinct, got q{0} twice")]
    RepeatedTarget(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no samples to estimate from")]
    EmptySamples,

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
