use thiserror::Error;

/// Errors raised by the solvers, certificates and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("zero vector is not allowed here: {0}")]
    ZeroVector(&'static str),

    #[error("problem too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("no admissible sparsity level found (nu = {nu}, rho = {rho}): {diagnostics}")]
    NoSparsity {
        nu: usize,
        rho: f64,
        diagnostics: String,
    },

    #[error("woodbury factor does not match the supplied matrix/beta")]
    FactorMismatch,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
