use thiserror::Error;

use crate::family::MeasureCertificate;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact enumeration was requested for a family above the enumeration cap.
    #[error("family of size {size} exceeds the enumeration cap {cap}; use a Monte Carlo estimator")]
    Resource { size: String, cap: u64 },

    /// Malformed matrix, family, corpus, or config input.
    #[error("parse error: {0}")]
    Parse(String),

    /// The map family violates the uniform-marginal hypothesis.
    #[error("hypothesis failure for {family}: worst marginal deviation {deviation:e}")]
    Hypothesis {
        family: String,
        deviation: f64,
        certificate: Box<MeasureCertificate>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
