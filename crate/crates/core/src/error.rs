use thiserror::Error;

/// Errors produced by validation and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix was singular or otherwise too degenerate to work with.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    /// Geometry or scenario input failed validation.
    #[error("validation: {0}")]
    Validation(String),

    /// Predicted and ground-truth trajectories are not aligned.
    #[error("alignment: {0}")]
    Alignment(String),

    /// Inconsistent configuration.
    #[error("config: {0}")]
    Config(String),

    /// A scenario document declared a schema version this build does not read.
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Scenario document could not be parsed as JSON.
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Error {
    /// Prefix validation-class messages with where the value came from
    /// (e.g. an actor id or a polygon index).
    pub fn context(self, ctx: &str) -> Error {
        match self {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{ctx}: {m}")),
            Error::Validation(m) => Error::Validation(format!("{ctx}: {m}")),
            Error::Alignment(m) => Error::Alignment(format!("{ctx}: {m}")),
            Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
