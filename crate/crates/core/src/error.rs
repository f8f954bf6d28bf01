use thiserror::Error;

/// Errors raised by geometry construction, passage-time queries and campaigns.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("point ({x}, {y}) lies outside the admissible region")]
    OutsideRegion { x: f64, y: f64 },

    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),

    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),

    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
