use thiserror::Error;

/// Errors raised by the geometry kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("quaternion norm {norm} deviates from 1 by more than {tolerance}")]
    NonUnitQuaternion { norm: f64, tolerance: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Errors raised while advancing a gate or a session.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("timestamp {got} ms does not follow previous timestamp {previous} ms")]
    NonMonotonicTimestamp { previous: u64, got: u64 },
    #[error("corrupt sample: {0}")]
    CorruptSample(#[from] MathError),
}

/// Configuration validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
