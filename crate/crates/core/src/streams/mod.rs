//! Stream data model, synthetic generators, CSV ingestion and multistream
//! scenario construction.

mod csv_loader;
mod generators;
mod scenario;

pub use csv_loader::{load_csv_stream, CsvSchema};
pub use generators::{generate_synthetic, GeneratorKind, GeneratorParams};
pub use scenario::{build_multistream_scenario, gaussian_scores, Multistream, ScenarioConfig};

use serde::{Deserialize, Serialize};

use crate::error::{ObalError, Result};

/// A feature vector with an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: Option<usize>,
    pub timestamp: u64,
}

impl Instance {
    pub fn labeled(features: Vec<f64>, label: usize, timestamp: u64) -> Self {
        Instance {
            features,
            label: Some(label),
            timestamp,
        }
    }

    pub fn unlabeled(features: Vec<f64>, timestamp: u64) -> Self {
        Instance {
            features,
            label: None,
            timestamp,
        }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Drops the label. The result is the only instance type the engine's
    /// target path accepts.
    pub fn into_target(self) -> TargetInstance {
        TargetInstance {
            features: self.features,
            timestamp: self.timestamp,
        }
    }
}

/// A target-stream instance. It has no label field, so target labels cannot
/// reach the learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetInstance {
    pub features: Vec<f64>,
    pub timestamp: u64,
}

impl TargetInstance {
    pub fn new(features: Vec<f64>, timestamp: u64) -> Self {
        TargetInstance {
            features,
            timestamp,
        }
    }

    /// Target rows inside a batch carry no label.
    pub fn as_instance(&self) -> Instance {
        Instance::unlabeled(self.features.clone(), self.timestamp)
    }
}

/// A fixed-size archived batch of instances sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataBatch {
    rows: Vec<Instance>,
    dim: usize,
    n_classes: usize,
}

impl DataBatch {
    pub fn new(rows: Vec<Instance>, dim: usize, n_classes: usize) -> Result<Self> {
        if rows.len() < 2 {
            return Err(ObalError::TooFewRows {
                required: 2,
                actual: rows.len(),
            });
        }
        for row in &rows {
            if row.dim() != dim {
                return Err(ObalError::DimensionMismatch {
                    expected: dim,
                    actual: row.dim(),
                });
            }
            if row.features.iter().any(|v| !v.is_finite()) {
                return Err(ObalError::NonFinite(format!(
                    "features at timestamp {}",
                    row.timestamp
                )));
            }
            if let Some(label) = row.label {
                if label >= n_classes {
                    return Err(ObalError::LabelOutOfRange { label, n_classes });
                }
            }
        }
        Ok(DataBatch {
            rows,
            dim,
            n_classes,
        })
    }

    pub fn rows(&self) -> &[Instance] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn is_labeled(&self) -> bool {
        self.rows.iter().all(|r| r.label.is_some())
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.rows.iter().map(|r| r.features.as_slice()).collect()
    }

    /// Labels of every row; fails if any row is unlabeled.
    pub fn labels(&self) -> Result<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| r.label.ok_or(ObalError::MissingLabel))
            .collect()
    }
}
