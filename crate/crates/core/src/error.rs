use std::io;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular system: zero pivot at column {pivot}")]
    SingularSystem { pivot: usize },

    #[error("singular local system in stencil {stencil} (pivot {pivot})")]
    SingularStencil { stencil: usize, pivot: usize },

    #[error("singular global system")]
    SingularGlobalSystem,

    #[error("singular time-step system")]
    SingularTimeStepSystem,

    #[error("non-finite state at time step {step}")]
    NonFiniteState { step: usize },

    #[error("degenerate point set: {0}")]
    DegeneratePointSet(String),

    #[error("zero gap between stencil nodes {0} and {1}")]
    ZeroGap(usize, usize),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("unsupported model schema: {0}")]
    SchemaVersionMismatch(String),

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("invalid shape strategy `{0}`")]
    InvalidStrategy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures caused by numerics rather than bad input or IO.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::SingularStencil { .. }
                | Error::SingularGlobalSystem
                | Error::SingularTimeStepSystem
                | Error::NonFiniteState { .. }
                | Error::NonFiniteGradient
        )
    }
}
