use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] ParseError),

    /// A composition was applied with the wrong number of components.
    #[error("arity mismatch: expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },

    /// Two values that must live over the same alphabet do not.
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    /// Two values that must live over the same carrier do not.
    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    /// A rank cap is too small for the requested operation.
    #[error("rank cap {cap} too small: {needed}")]
    CapTooSmall { cap: usize, needed: String },

    /// Enumeration refused because it would be too large.
    #[error("enumeration refused: {0}")]
    EnumerationOverflow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A parse failure, with enough position information to point at the
/// offending token.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{context}: {message} at {line}:{column}")]
pub struct ParseError {
    /// What was being parsed ("term", or a file name).
    pub context: String,
    pub message: String,
    /// 1-based line (always 1 for single-line terms).
    pub line: usize,
    /// 1-based column in characters.
    pub column: usize,
}

impl ParseError {
    pub fn new(
        context: impl Into<String>,
        message: impl Into<String>,
        line: usize,
        column: usize,
    ) -> Self {
        ParseError {
            context: context.into(),
            message: message.into(),
            line,
            column,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
