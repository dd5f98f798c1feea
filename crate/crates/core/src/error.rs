// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Failure modes shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller passed data in the wrong state or shape (wrong transform space, grid mismatch, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// A parameter failed range validation before any computation started.
    #[error("validation error: {0}")]
    Validation(String),
    /// A self-certified quadrature or extrapolation did not reach its tolerance.
    #[error(
        "numerical accuracy error: {what} (observed {observed:.3e}, tolerance {tolerance:.1e})"
    )]
    NumericalAccuracy {
        what: String,
        observed: f64,
        tolerance: f64,
    },
    /// A trajectory produced non-finite values.
    #[error("divergence at step {step} (t = {time}): {what}")]
    Divergence {
        step: usize,
        time: f64,
        what: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
