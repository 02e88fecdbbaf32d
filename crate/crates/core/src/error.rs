use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ObalError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ObalError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("batch needs at least {required} rows, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown generator kind `{0}`")]
    UnknownGenerator(String),

    #[error("change point {point} lies beyond stream length {length}")]
    ChangePointOutOfRange { point: usize, length: usize },

    #[error("scenario sizes sum to {requested} but the dataset has {available} instances")]
    SizesExceedDataset { requested: usize, available: usize },

    #[error("scenario leaves the target stream empty")]
    EmptyTarget,

    #[error("missing label for a labeled operation")]
    MissingLabel,

    #[error("label {label} is outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("negative training weight {0}")]
    NegativeWeight(f64),

    #[error("classifier has not been trained")]
    Untrained,

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("empty archive")]
    EmptyArchive,

    #[error("component count {k} exceeds the {rows} available rows")]
    TooManyComponents { k: usize, rows: usize },

    #[error("unknown source stream index {index} (engine has {n_sources})")]
    UnknownSource { index: usize, n_sources: usize },

    #[error("engine has not been initialized")]
    NotInitialized,

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv row {row}, column {column}: {message}")]
    CsvParse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("unsupported snapshot format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },
}

impl ObalError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ObalError::Io {
            path: path.into(),
            source,
        }
    }
}
