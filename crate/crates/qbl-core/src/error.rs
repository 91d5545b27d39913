use crate::datum::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: String },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("{kind} index {index} out of range (len {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid datum:\n{report}")]
    InvalidDatum { report: ValidationReport },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("not a subspace quiver: {reason}")]
    NonSubspaceQuiver { reason: String },

    #[error("scaling condition violated: lhs {lhs} != rhs {rhs}")]
    ScalingViolated { lhs: String, rhs: String },

    #[error("invalid parameter: {what}")]
    InvalidParameter { what: String },
}

impl Error {
    pub fn not_pd(context: impl Into<String>) -> Self {
        Error::NotPositiveDefinite {
            context: context.into(),
        }
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn param(what: impl Into<String>) -> Self {
        Error::InvalidParameter { what: what.into() }
    }
}
