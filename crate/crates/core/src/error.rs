use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. The variants fall into three families
/// (input data, configuration, training) so front ends can map them onto
/// distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("target range is degenerate (min = max = {0})")]
    DegenerateRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("unknown learner `{0}`")]
    UnknownLearner(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("malformed spec file {path}: {message}")]
    SpecFile { path: PathBuf, message: String },

    #[error("model file {path}: {message}")]
    ModelFile { path: PathBuf, message: String },

    #[error("bag {bag}: {source}")]
    Bag {
        bag: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("stacking fold {fold}, learner {learner}: {source}")]
    Stacking {
        fold: String,
        learner: String,
        #[source]
        source: Box<Error>,
    },

    #[error("cross-validation fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fitness of genome {genome}: {source}")]
    Fitness {
        genome: String,
        #[source]
        source: Box<Error>,
    },

    #[error("training failed: {0}")]
    Training(String),
}

/// Coarse classification used by the command line for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Config,
    Training,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::Parse { .. }
            | Error::Dataset(_)
            | Error::Dimension { .. }
            | Error::ModelFile { .. } => ErrorKind::Data,
            Error::InvalidParameter(_)
            | Error::UnknownLearner(_)
            | Error::UnknownGenerator(_)
            | Error::SpecFile { .. } => ErrorKind::Config,
            Error::DegenerateRange(_)
            | Error::Bag { .. }
            | Error::Stacking { .. }
            | Error::Fold { .. }
            | Error::Fitness { .. }
            | Error::Training(_) => ErrorKind::Training,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
