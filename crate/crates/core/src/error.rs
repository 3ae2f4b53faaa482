use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("index {index} out of range 0..{len}")]
    OutOfRange { index: i64, len: usize },

    /// A z-indexed quantity is singular at a pole of the sphere.
    #[error("pole singularity at tau = {tau} ({what})")]
    Pole { tau: f64, what: &'static str },

    #[error("overflow evaluating {what} at tau = {tau}")]
    Overflow { tau: f64, what: &'static str },

    #[error("frame coefficient underflow at xi = {xi}: window misses the Beta-weight mass")]
    Underflow { xi: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(&'static str),

    #[error("non-finite integrand at quadrature node (tau = {tau}, theta = {theta})")]
    NonFinite { tau: f64, theta: f64 },

    #[error("zero denominator in {what}")]
    ZeroDenominator { what: String },

    #[error("quadrature grid too small: {0}")]
    GridTooSmall(String),

    #[error("{what}: two evaluations disagree by {deviation:e}")]
    Inconsistent { what: &'static str, deviation: f64 },

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name, reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
