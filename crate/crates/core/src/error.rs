use thiserror::Error;

use crate::estimators::SsLevelRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("horizon mismatch: spec expects {expected} steps, trace has {found}")]
    HorizonMismatch { expected: usize, found: usize },

    #[error("state diverged at step {step}")]
    Divergence { step: usize },

    #[error("model evaluation failed for sample {sample}: {source}")]
    Evaluation {
        sample: u64,
        #[source]
        source: Box<Error>,
    },

    /// Order statistics around the level cut are equal and no usable gap exists.
    #[error("degenerate threshold: {0}")]
    DegenerateThreshold(String),

    #[error("level cap of {max_levels} reached before the target event was sampled")]
    LevelCap {
        max_levels: usize,
        partial: Vec<SsLevelRecord>,
    },

    #[error("importance density construction failed: {0}")]
    IsdConstruction(String),

    #[error("importance density has zero mass at event sample {sample}")]
    SupportViolation { sample: u64 },

    #[error("model does not support trajectory splitting: {0}")]
    SplittingUnsupported(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_sample(self, sample: u64) -> Self {
        match self {
            e @ Error::Evaluation { .. } => e,
            other => Error::Evaluation {
                sample,
                source: Box::new(other),
            },
        }
    }
}
