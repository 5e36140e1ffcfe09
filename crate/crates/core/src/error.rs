use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("pump ratio {0} is at or above the oscillation threshold")]
    AboveThreshold(f64),

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("homodyne lock point lost: offset {offset} exceeds error-signal magnitude {ratio}")]
    LockPointLost { offset: f64, ratio: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Config,
    Model,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Usage(_) => ErrorKind::Usage,
            Error::Config(_) | Error::InvalidParameter { .. } => ErrorKind::Config,
            _ => ErrorKind::Model,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}
