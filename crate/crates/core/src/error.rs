use crate::capacity::CapacityResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input: bad distribution, mismatched alphabets, out-of-range index.
    #[error("validation error: {0}")]
    Validation(String),

    /// A parameter lies outside the domain of the quantity being computed.
    #[error("domain error: {0}")]
    Domain(String),

    /// Semantic capacity with alpha = 0 is unbounded.
    #[error("semantic capacity is unbounded for alpha = 0")]
    UnboundedSemanticCapacity,

    /// Experiment configuration or enumeration budget violation.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical procedure failed to reach its tolerance.
    #[error("numeric error: {message} (partial estimate {partial}, error estimate {error_estimate})")]
    Numeric {
        message: String,
        partial: f64,
        error_estimate: f64,
    },

    /// Blahut–Arimoto hit its iteration limit; carries the best result so far.
    #[error("Blahut-Arimoto did not converge after {} iterations (gap {})", .0.iterations, .0.gap)]
    NotConverged(Box<CapacityResult>),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
