use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// A numerical procedure did not produce a usable answer.
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}

/// Rejects NaN and infinities.
pub(crate) fn finite(what: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(what, x))
    }
}
