//! Weighted incremental base classifiers and the unweighted averaging
//! ensemble.

mod gaussian;
mod hoeffding;
mod naive_bayes;

pub use gaussian::GaussianEstimator;
pub use hoeffding::{hoeffding_bound, HoeffdingTree, HoeffdingTreeParams, LeafPrediction};
pub use naive_bayes::{ClassStats, NaiveBayes};

use serde::{Deserialize, Serialize};

use crate::error::{ObalError, Result};
use crate::streams::Instance;

/// An incremental classifier over `dim` features and `n_classes` classes
/// that accepts a nonnegative weight per training instance.
pub trait Classifier {
    fn dim(&self) -> usize;
    fn n_classes(&self) -> usize;
    fn is_trained(&self) -> bool;
    fn train(&mut self, features: &[f64], label: usize, weight: f64) -> Result<()>;
    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>>;

    fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(features)?))
    }

    /// Trains on a labeled instance; unlabeled instances are rejected.
    fn train_weighted(&mut self, instance: &Instance, weight: f64) -> Result<()> {
        let label = instance.label.ok_or(ObalError::MissingLabel)?;
        self.train(&instance.features, label, weight)
    }
}

pub(crate) fn check_dim<C: Classifier + ?Sized>(c: &C, features: &[f64]) -> Result<()> {
    if features.len() != c.dim() {
        return Err(ObalError::DimensionMismatch {
            expected: c.dim(),
            actual: features.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_training_input<C: Classifier + ?Sized>(
    c: &C,
    features: &[f64],
    label: usize,
    weight: f64,
) -> Result<()> {
    check_dim(c, features)?;
    if label >= c.n_classes() {
        return Err(ObalError::LabelOutOfRange {
            label,
            n_classes: c.n_classes(),
        });
    }
    if weight.is_nan() || weight < 0.0 {
        return Err(ObalError::NegativeWeight(weight));
    }
    if !weight.is_finite() {
        return Err(ObalError::NonFinite("training weight".into()));
    }
    Ok(())
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Which base learner to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerKind {
    HoeffdingTree(HoeffdingTreeParams),
    NaiveBayes,
}

impl Default for LearnerKind {
    fn default() -> Self {
        LearnerKind::HoeffdingTree(HoeffdingTreeParams::default())
    }
}

impl LearnerKind {
    pub fn build(&self, dim: usize, n_classes: usize) -> BaseLearner {
        match self {
            LearnerKind::HoeffdingTree(p) => {
                BaseLearner::HoeffdingTree(HoeffdingTree::new(dim, n_classes, p.clone()))
            }
            LearnerKind::NaiveBayes => BaseLearner::NaiveBayes(NaiveBayes::new(dim, n_classes)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerKind::HoeffdingTree(p) => p.validate(),
            LearnerKind::NaiveBayes => Ok(()),
        }
    }
}

/// Concrete base learner; serializable so pools and checkpoints can persist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum BaseLearner {
    HoeffdingTree(HoeffdingTree),
    NaiveBayes(NaiveBayes),
}

impl Classifier for BaseLearner {
    fn dim(&self) -> usize {
        match self {
            BaseLearner::HoeffdingTree(t) => t.dim(),
            BaseLearner::NaiveBayes(n) => n.dim(),
        }
    }

    fn n_classes(&self) -> usize {
        match self {
            BaseLearner::HoeffdingTree(t) => t.n_classes(),
            BaseLearner::NaiveBayes(n) => n.n_classes(),
        }
    }

    fn is_trained(&self) -> bool {
        match self {
            BaseLearner::HoeffdingTree(t) => t.is_trained(),
            BaseLearner::NaiveBayes(n) => n.is_trained(),
        }
    }

    fn train(&mut self, features: &[f64], label: usize, weight: f64) -> Result<()> {
        match self {
            BaseLearner::HoeffdingTree(t) => t.train(features, label, weight),
            BaseLearner::NaiveBayes(n) => n.train(features, label, weight),
        }
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        match self {
            BaseLearner::HoeffdingTree(t) => t.predict_proba(features),
            BaseLearner::NaiveBayes(n) => n.predict_proba(features),
        }
    }
}

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Snapshot<T> {
    format_version: u32,
    classifier: T,
}

impl BaseLearner {
    /// Versioned JSON snapshot.
    pub fn to_snapshot(&self) -> Result<String> {
        Ok(serde_json::to_string(&Snapshot {
            format_version: SNAPSHOT_VERSION,
            classifier: self,
        })?)
    }

    pub fn from_snapshot(json: &str) -> Result<Self> {
        let snap: Snapshot<BaseLearner> = serde_json::from_str(json)?;
        if snap.format_version != SNAPSHOT_VERSION {
            return Err(ObalError::FormatVersion {
                found: snap.format_version,
                expected: SNAPSHOT_VERSION,
            });
        }
        Ok(snap.classifier)
    }
}

/// Element-wise mean of equally weighted distributions.
pub fn average_distributions(distributions: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = distributions.first().ok_or(ObalError::EmptyEnsemble)?;
    let mut mean = vec![0.0; first.len()];
    for dist in distributions {
        if dist.len() != mean.len() {
            return Err(ObalError::DimensionMismatch {
                expected: mean.len(),
                actual: dist.len(),
            });
        }
        for (m, p) in mean.iter_mut().zip(dist) {
            *m += p;
        }
    }
    let n = distributions.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Argmax of the unweighted mean of member distributions (ties → lowest
/// class index).
pub fn average_ensemble_predict<C: Classifier>(members: &[&C], features: &[f64]) -> Result<usize> {
    let dists = members
        .iter()
        .map(|m| m.predict_proba(features))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax(&average_distributions(&dists)?))
}
