use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input files.
    #[error("{0}")]
    Input(String),

    /// Bad flags, config values or parameter combinations.
    #[error("{0}")]
    Config(String),

    /// Inputs that parse but do not agree with each other.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

impl From<cohort_forge::Error> for CliError {
    fn from(e: cohort_forge::Error) -> Self {
        use cohort_forge::Error as E;
        let msg = e.to_string();
        match e {
            E::EmptyInput | E::MalformedRow { .. } | E::Io(_) | E::Json(_) => CliError::Input(msg),
            E::InvalidParameter(_) | E::NonpositiveTemperature(_) => CliError::Config(msg),
            E::PartitionMismatch(_) | E::IndexOutOfRange { .. } | E::SameCommunity(..) | E::NoSwapPossible => {
                CliError::Data(msg)
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
