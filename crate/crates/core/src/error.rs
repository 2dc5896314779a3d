use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An orbit left the admissible region (non-finite entry or norm above
    /// the divergence radius).
    #[error("orbit diverged at step {step} (norm {norm})")]
    Divergence { step: usize, norm: f64 },

    /// A mixing rate at or above one: the chain is not uniformly ergodic.
    #[error("uniform ergodicity violated: mixing rate {0} is not below 1")]
    NotErgodic(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("not a row-stochastic matrix: {0}")]
    NotStochastic(String),

    #[error("missing statistic: {0}")]
    MissingStatistic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
