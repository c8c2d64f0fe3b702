use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("xml parse error at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("no documents")]
    NoDocuments,

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("out-of-vocabulary word {word:?} in space {space}")]
    OutOfVocabulary { word: String, space: String },

    #[error("non-finite loss during training (lr {lr}, step {step})")]
    NonFinite { lr: f64, step: u64 },

    #[error("svd did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid synthetic spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn oov(word: &str, space: &str) -> Self {
        Error::OutOfVocabulary {
            word: word.to_owned(),
            space: space.to_owned(),
        }
    }

    /// True for failures of the numerical routines rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::NoConvergence { .. } | Error::RankDeficient
        )
    }
}
