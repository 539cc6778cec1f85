use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown student `{0}`")]
    UnknownStudent(String),

    #[error("unknown college `{0}`")]
    UnknownCollege(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("enumeration needs {required} profiles, budget is {budget}")]
    EnumerationBudget { required: u128, budget: u128 },

    #[error("position {position} outside 1..={students}")]
    PositionOutOfRange { position: usize, students: usize },

    #[error("no finite threshold: first-choice probabilities are equal")]
    NoFiniteThreshold,

    #[error("first-choice probability under TCDM is below DA ({tcdm} < {da})")]
    ThresholdPrecondition { tcdm: f64, da: f64 },

    #[error("clause {clause} violated at position {position}, outcome {outcome}: {detail}")]
    PropertyViolation {
        clause: u8,
        position: usize,
        outcome: String,
        detail: String,
    },

    #[error("malformed snapshot {path}: {detail}")]
    Snapshot { path: PathBuf, detail: String },

    #[error("ground truth mismatch: {0}")]
    TruthMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
