use alloc::string::String;

/// Errors produced by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown drug `{0}`")]
    UnknownDrug(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cannot build {k} folds: minority class has only {minority} members")]
    TooManyFolds { k: usize, minority: usize },

    #[error("test fold lacks {0}; rate is undefined")]
    DegenerateFold(&'static str),

    #[error("fitness of individual {index} in generation {generation} is not finite ({value})")]
    NonFiniteFitness {
        generation: usize,
        index: usize,
        value: f64,
    },

    #[error("evaluation of chromosome {chromosome} failed: {source}")]
    Evaluation {
        chromosome: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("degenerate samples: {0}")]
    DegenerateSamples(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
