use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edit request repeats index {index}")]
    DuplicateIndex { index: usize },

    #[error("index {index} out of range for database of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("edit batch size {r} outside [1, {n}]")]
    BatchSize { r: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operation requires a quadratic loss, got {0}")]
    NotQuadratic(&'static str),

    #[error("non-finite parameters at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("gradient clipping binds at iteration {iteration}; linear-Gaussian oracle is invalid")]
    ClippingActive { iteration: usize },

    #[error("cannot compose bounds of different orders ({0} vs {1})")]
    MixedOrders(f64, f64),

    #[error("databases differ in {0} records; expected exactly one")]
    NotNeighbours(usize),

    #[error("requester emitted an invalid request at step {step}: {source}")]
    Requester {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("records must be distinct")]
    NotDistinct,

    #[error("database size must be odd, got {0}")]
    EvenSize(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn ensure_positive<T: crate::Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}
