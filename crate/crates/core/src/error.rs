use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A spec or parameter failed its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested lattice does not fit in memory or in `usize`.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The kernel window around an evaluation point holds no lattice site.
    #[error("degenerate bandwidth: {0}")]
    DegenerateBandwidth(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// An iterative solver stopped before meeting its tolerance.
    #[error("numerical error: {message} (after {iterations} iterations, bracket [{lower}, {upper}])")]
    Numerical {
        message: String,
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    /// The Orlicz expectation is infinite for every scale in the search range.
    #[error("divergent: {0}")]
    Divergent(String),

    /// A Monte Carlo replication failed; `seed` reproduces it.
    #[error("replication with seed {seed} failed: {source}")]
    Replication { seed: u64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

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
        Error::Configuration(msg.into())
    }
}
