use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Rejections of a protocol run are not errors; they are reported in the
/// transcript verdict.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("pair index {index} out of range for {len} pairs")]
    PairOutOfRange { index: usize, len: usize },

    #[error("gate needs two distinct pairs, got {0} twice")]
    SamePair(usize),

    #[error("subset selects no bit of the live pairs")]
    EmptySubset,

    #[error("{qubits} qubits exceeds the dense simulator cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },

    #[error("state cannot be normalized (norm {0})")]
    Unnormalizable(f64),

    #[error("distribution is not normalized (total weight {0})")]
    Unnormalized(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no pairs left to measure")]
    NoSurvivors,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
