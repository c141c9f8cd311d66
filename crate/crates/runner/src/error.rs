use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VALIDITY: i32 = 2;
pub const EXIT_NUMERICS: i32 = 3;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("records: {0}")]
    Records(String),
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: phasefront::Error,
    },
}

impl RunnerError {
    pub fn model(context: impl Into<String>, source: phasefront::Error) -> Self {
        RunnerError::Model { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Model { source, .. } if source.is_validity_halt() => EXIT_VALIDITY,
            RunnerError::Model { source: phasefront::Error::Numerics(_), .. } => EXIT_NUMERICS,
            RunnerError::Model { source: phasefront::Error::SurfaceSolve(_), .. } => EXIT_NUMERICS,
            _ => EXIT_INPUT,
        }
    }
}
