use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("staggered hopping needs an odd number of cavities, got {0}")]
    EvenStaggeredChain(usize),

    #[error("zero intermediate-level detuning: the two-photon coupling g1*g2/delta is undefined")]
    ZeroDetuning,

    #[error("photon-number sector n = {0} has no dressed pair (n must be >= 2)")]
    PhotonSector(u32),

    #[error("operation requires {expected} hopping")]
    PatternMismatch { expected: &'static str },

    #[error("time grid is empty")]
    EmptyTimeGrid,

    #[error("time window [{start}, {end}] is empty or degenerate")]
    EmptyWindow { start: f64, end: f64 },

    #[error("state norm deviates from 1 by {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid encoding: {0}")]
    Encoding(String),

    #[error("linear fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("sweep point {value}: {source}")]
    SweepPoint {
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
