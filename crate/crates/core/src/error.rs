use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point was evaluated outside the extended box.
    #[error("point {point:?} lies outside the extended box")]
    Domain { point: Vec<f64> },

    /// An input violates a documented precondition (negative multiplier,
    /// dimension mismatch, V < 1, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A problem or solver definition is malformed.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("window [{start}, {end}) exceeds trace length {len}")]
    Range { start: usize, end: usize, len: usize },

    #[error("non-finite value at iteration {iteration}")]
    Numeric { iteration: usize },

    #[error("multiplier estimate did not converge: residual {residual:e} > {threshold:e}")]
    Estimation { residual: f64, threshold: f64 },

    #[error("no feasible reference point: {0}")]
    Infeasible(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
