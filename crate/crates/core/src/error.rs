use std::path::PathBuf;

/// Errors raised across the probe pipeline.
///
/// Variants are grouped by category so front ends can map them to exit codes
/// (see [`Error::category`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("power iteration did not converge within {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("probe generation failed: {0}")]
    Generation(String),

    #[error("contrast failed for configuration {configuration}: {reason}")]
    Contrast {
        configuration: String,
        reason: String,
    },

    #[error("predicate `{predicate}` is missing summary `{field}`")]
    MissingSummary {
        predicate: &'static str,
        field: &'static str,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse error category, stable across versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parameter,
    Convergence,
    Io,
    Contrast,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parameter { .. } | Error::Validation(_) | Error::Format { .. } => {
                ErrorCategory::Parameter
            }
            Error::Json(_) | Error::Csv(_) => ErrorCategory::Parameter,
            Error::Convergence { .. } | Error::Generation(_) => ErrorCategory::Convergence,
            Error::Io { .. } => ErrorCategory::Io,
            Error::Contrast { .. } | Error::MissingSummary { .. } => ErrorCategory::Contrast,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
