use serde::{Deserialize, Serialize};

use super::gaussian::GaussianEstimator;
use super::Classifier;
use crate::error::{ObalError, Result};

/// Added to every class-conditional variance, relative to the pooled
/// variance of the feature.
const VAR_SMOOTHING: f64 = 1e-2;
const VAR_FLOOR: f64 = 1e-9;

/// Weighted class counts and per-class Gaussian feature estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    class_weights: Vec<f64>,
    /// `observers[class][feature]`
    observers: Vec<Vec<GaussianEstimator>>,
}

impl ClassStats {
    pub fn new(dim: usize, n_classes: usize) -> Self {
        ClassStats {
            class_weights: vec![0.0; n_classes],
            observers: vec![vec![GaussianEstimator::default(); dim]; n_classes],
        }
    }

    /// Class counts without feature statistics, e.g. for a freshly split leaf.
    pub fn with_class_weights(dim: usize, class_weights: Vec<f64>) -> Self {
        let n_classes = class_weights.len();
        ClassStats {
            class_weights,
            observers: vec![vec![GaussianEstimator::default(); dim]; n_classes],
        }
    }

    pub fn add(&mut self, features: &[f64], label: usize, weight: f64) {
        self.class_weights[label] += weight;
        for (obs, &x) in self.observers[label].iter_mut().zip(features) {
            obs.add(x, weight);
        }
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn total_weight(&self) -> f64 {
        self.class_weights.iter().sum()
    }

    pub fn observer(&self, class: usize, feature: usize) -> &GaussianEstimator {
        &self.observers[class][feature]
    }

    pub fn dim(&self) -> usize {
        self.observers.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.class_weights.len()
    }

    /// Add-one smoothed class distribution.
    pub fn majority_proba(&self) -> Vec<f64> {
        let c = self.class_weights.len() as f64;
        let total = self.total_weight();
        self.class_weights.iter().map(|w| (w + 1.0) / (total + c)).collect()
    }

    /// Naive-Bayes posterior with add-one smoothed priors. Classes with no
    /// feature statistics borrow the pooled estimator.
    pub fn naive_bayes_proba(&self, features: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let pooled: Vec<GaussianEstimator> = (0..dim)
            .map(|j| {
                let mut g = GaussianEstimator::default();
                for class_obs in &self.observers {
                    g.merge(&class_obs[j]);
                }
                g
            })
            .collect();
        let smoothing: Vec<f64> = pooled
            .iter()
            .map(|g| VAR_SMOOTHING * g.variance() + VAR_FLOOR)
            .collect();
        let prior = self.majority_proba();
        let mut log_post: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
        let mut terms = vec![0.0; self.n_classes()];
        for (j, &x) in features.iter().enumerate() {
            for (c, term) in terms.iter_mut().enumerate() {
                let obs = &self.observers[c][j];
                let est = if obs.weight() > 0.0 { obs } else { &pooled[j] };
                *term = if est.weight() > 0.0 {
                    est.log_density(x, smoothing[j])
                } else {
                    0.0
                };
            }
            // A per-feature shift common to all classes keeps the priors from
            // vanishing into the rounding of very large log densities.
            let shift = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for (lp, term) in log_post.iter_mut().zip(&terms) {
                *lp += term - shift;
            }
        }
        softmax(&log_post)
    }
}

pub(crate) fn softmax(log_values: &[f64]) -> Vec<f64> {
    let max = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = log_values.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Incremental Gaussian naive Bayes with fractional instance weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    stats: ClassStats,
}

impl NaiveBayes {
    pub fn new(dim: usize, n_classes: usize) -> Self {
        NaiveBayes {
            stats: ClassStats::new(dim, n_classes),
        }
    }

    pub fn stats(&self) -> &ClassStats {
        &self.stats
    }
}

impl Classifier for NaiveBayes {
    fn dim(&self) -> usize {
        self.stats.dim()
    }

    fn n_classes(&self) -> usize {
        self.stats.n_classes()
    }

    fn is_trained(&self) -> bool {
        self.stats.total_weight() > 0.0
    }

    fn train(&mut self, features: &[f64], label: usize, weight: f64) -> Result<()> {
        super::check_training_input(self, features, label, weight)?;
        if weight == 0.0 {
            return Ok(());
        }
        self.stats.add(features, label, weight);
        Ok(())
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        if !self.is_trained() {
            return Err(ObalError::Untrained);
        }
        super::check_dim(self, features)?;
        Ok(self.stats.naive_bayes_proba(features))
    }
}
