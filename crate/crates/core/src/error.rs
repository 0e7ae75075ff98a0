use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no valid membership rows in input")]
    EmptyInput,

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("entity index {index} out of range for {len} entities")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("community set does not partition the network: {0}")]
    PartitionMismatch(String),

    #[error("entities {0} and {1} are in the same community")]
    SameCommunity(usize, usize),

    #[error("no swap possible: every entity is in one community")]
    NoSwapPossible,

    #[error("temperature must be positive, got {0}")]
    NonpositiveTemperature(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
