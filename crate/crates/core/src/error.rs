use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A user-supplied value failed validation. `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("graph not connected")]
    GraphNotConnected,

    #[error("no edges")]
    NoEdges,

    #[error("D0 out of range: {0} is not in (0, pi)")]
    D0OutOfRange(f64),

    #[error("empty epsilon interval")]
    EmptyEpsilonInterval,

    #[error("epsilon {eps} outside admissible interval ({lo}, {hi})")]
    EpsilonOutOfInterval { eps: f64, lo: f64, hi: f64 },

    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
