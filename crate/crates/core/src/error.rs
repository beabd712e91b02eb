use std::path::PathBuf;

/// Errors produced by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unstable drive point: q = {q}")]
    UnstableDrive { q: f64 },

    #[error("untrapped mode: secular frequency is zero")]
    UntrappedMode,

    #[error("integration failed at t = {t}: step size {h:e} underflowed (achieved tolerance {achieved:e})")]
    StepUnderflow { t: f64, h: f64, achieved: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{path}:{line}: field `{field}`: {reason}")]
    Catalog {
        path: PathBuf,
        line: usize,
        field: String,
        reason: String,
    },

    #[error("config field `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of numerical procedures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnstableDrive { .. }
                | Error::UntrappedMode
                | Error::StepUnderflow { .. }
                | Error::TooManySteps { .. }
                | Error::NonFinite { .. }
                | Error::NoConvergence { .. }
                | Error::InvariantViolation(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
