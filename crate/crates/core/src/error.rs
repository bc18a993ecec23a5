use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("unresolved on this grid: {0}")]
    Unresolved(String),

    #[error("scale grid truncated: u_max = {requested} exceeds the resolvable limit {limit}")]
    Truncation { requested: f64, limit: f64 },

    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("derivative order {order} exceeds the configured maximum {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("malformed symbol table: {0}")]
    Table(String),

    #[error("malformed field file: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        domain,
    }
}
