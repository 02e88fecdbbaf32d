//! AdaCOSA initialization: align every source batch to the target batch and
//! iteratively re-weight source instances by the feedback of an ensemble
//! spanning source-space and target-space classifiers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ObalError, Result};
use crate::learners::{argmax, BaseLearner, Classifier, LearnerKind};
use crate::linalg::{apply_alignment, coral_transform, regularized_covariance, AlignmentTransform};
use crate::streams::DataBatch;

/// How source batches are mapped into the target space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    /// Identity transform; target classifiers see raw source features.
    Off,
    /// CORAL on unweighted covariances, features left unscaled.
    Plain,
    /// CORAL on covariances of rows scaled by their correlation weights.
    #[default]
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaCosaConfig {
    pub i_max: usize,
    pub alignment: AlignmentMode,
    /// When false every correlation weight stays at 1.
    pub reweighting: bool,
    pub learner: LearnerKind,
}

impl Default for AdaCosaConfig {
    fn default() -> Self {
        AdaCosaConfig {
            i_max: 3,
            alignment: AlignmentMode::Weighted,
            reweighting: true,
            learner: LearnerKind::default(),
        }
    }
}

/// `β = ½·ln(1 + √(2·ln(L_n / I_max)))`.
pub fn compute_beta(l_n: usize, i_max: usize) -> Result<f64> {
    if i_max == 0 || l_n <= i_max {
        return Err(ObalError::InvalidConfig(format!(
            "L_n / I_max must exceed 1 (L_n = {l_n}, I_max = {i_max})"
        )));
    }
    let ratio = l_n as f64 / i_max as f64;
    Ok(0.5 * (1.0 + (2.0 * ratio.ln()).sqrt()).ln())
}

/// Multiplies `cw` by `e^{−β}` on a misclassification.
pub fn update_correlation_weight(cw: f64, predicted: usize, truth: usize, beta: f64) -> f64 {
    if predicted == truth {
        cw
    } else {
        cw * (-beta).exp()
    }
}

/// `Σ_i (w_i / Σ_j w_j) · p_i`. Zero total weight falls back to a plain
/// average.
pub fn weighted_distribution(members: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
    let first = members.first().ok_or(ObalError::EmptyEnsemble)?;
    let total: f64 = members.iter().map(|(_, w)| *w).sum();
    let mut out = vec![0.0; first.0.len()];
    for (dist, w) in members {
        if dist.len() != out.len() {
            return Err(ObalError::LengthMismatch {
                left: out.len(),
                right: dist.len(),
            });
        }
        let coef = if total > 0.0 {
            w / total
        } else {
            1.0 / members.len() as f64
        };
        for (o, p) in out.iter_mut().zip(dist) {
            *o += coef * p;
        }
    }
    Ok(out)
}

/// Per-source output of initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceInit {
    pub target_classifier: BaseLearner,
    pub source_classifier: BaseLearner,
    pub transform: AlignmentTransform,
    /// Per-instance weights `cw^t`, aligned with `archive` rows.
    pub weights: Vec<f64>,
    pub archive: DataBatch,
}

impl SourceInit {
    /// Scalar classifier weight, the mean of the per-instance weights.
    pub fn classifier_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() / self.weights.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitResult {
    pub sources: Vec<SourceInit>,
    pub target_batch: DataBatch,
    pub beta: Option<f64>,
}

impl InitResult {
    /// Normalized ensemble coefficients `cw_i / Σ_j cw_j`.
    pub fn ensemble_coefficients(&self) -> Vec<f64> {
        let w: Vec<f64> = self.sources.iter().map(SourceInit::classifier_weight).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }
}

struct Round {
    source_classifier: BaseLearner,
    target_classifier: BaseLearner,
    transform: AlignmentTransform,
    aligned: DataBatch,
}

fn run_round(
    source: &DataBatch,
    weights: &[f64],
    target_cov: &crate::linalg::CovMatrix,
    config: &AdaCosaConfig,
) -> Result<Round> {
    let (dim, classes) = (source.dim(), source.n_classes());
    let (transform, feature_weights) = match config.alignment {
        AlignmentMode::Off => (AlignmentTransform::identity(dim), None),
        AlignmentMode::Plain => (coral_transform(&regularized_covariance(source, None)?, target_cov)?, None),
        AlignmentMode::Weighted => (
            coral_transform(&regularized_covariance(source, Some(weights))?, target_cov)?,
            Some(weights),
        ),
    };
    let aligned = apply_alignment(source, feature_weights, &transform)?;
    let mut source_classifier = config.learner.build(dim, classes);
    let mut target_classifier = config.learner.build(dim, classes);
    for row in source.rows() {
        source_classifier.train_weighted(row, 1.0)?;
    }
    for (aligned_row, w) in aligned.rows().iter().zip(weights) {
        target_classifier.train_weighted(aligned_row, *w)?;
    }
    Ok(Round {
        source_classifier,
        target_classifier,
        transform,
        aligned,
    })
}

/// Runs the initialization over `I_max` re-weighting rounds.
pub fn adacosa_init(sources: &[DataBatch], target: &DataBatch, config: &AdaCosaConfig) -> Result<InitResult> {
    let first = sources
        .first()
        .ok_or_else(|| ObalError::InvalidConfig("at least one source batch is required".into()))?;
    config.learner.validate()?;
    if config.i_max == 0 {
        return Err(ObalError::InvalidConfig("I_max must be at least 1".into()));
    }
    let dim = target.dim();
    for s in sources {
        if s.dim() != dim {
            return Err(ObalError::DimensionMismatch {
                expected: dim,
                actual: s.dim(),
            });
        }
        if !s.is_labeled() {
            return Err(ObalError::MissingLabel);
        }
        if s.n_classes() != first.n_classes() {
            return Err(ObalError::InvalidConfig("source batches disagree on class count".into()));
        }
    }
    let beta = if config.reweighting {
        Some(compute_beta(first.len(), config.i_max)?)
    } else {
        None
    };
    let rounds_to_run = if config.reweighting { config.i_max } else { 1 };
    let target_cov = regularized_covariance(target, None)?;
    let mut weights: Vec<Vec<f64>> = sources.iter().map(|s| vec![1.0; s.len()]).collect();
    let labels: Vec<Vec<usize>> = sources.iter().map(|s| s.labels()).collect::<Result<_>>()?;

    let mut rounds = Vec::new();
    for _ in 0..rounds_to_run {
        rounds = sources
            .par_iter()
            .zip(weights.par_iter())
            .map(|(s, w)| run_round(s, w, &target_cov, config))
            .collect::<Result<Vec<_>>>()?;
        let Some(beta) = beta else { break };
        // Barrier: the estimator spans every source, so weights change only
        // after all rounds are trained.
        let source_models: Vec<&BaseLearner> = rounds.iter().map(|r| &r.source_classifier).collect();
        let target_models: Vec<&BaseLearner> = rounds.iter().map(|r| &r.target_classifier).collect();
        let updates = sources
            .par_iter()
            .zip(rounds.par_iter())
            .zip(weights.par_iter().zip(labels.par_iter()))
            .map(|((s, round), (w, y))| {
                s.rows()
                    .iter()
                    .zip(round.aligned.rows())
                    .zip(w.iter().zip(y))
                    .map(|((raw, aligned), (cw, label))| {
                        let mut dists = Vec::with_capacity(2 * source_models.len());
                        for m in &source_models {
                            dists.push(m.predict_proba(&raw.features)?);
                        }
                        for m in &target_models {
                            dists.push(m.predict_proba(&aligned.features)?);
                        }
                        let avg = crate::learners::average_distributions(&dists)?;
                        Ok(update_correlation_weight(*cw, argmax(&avg), *label, beta))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        weights = updates;
    }

    let sources = rounds
        .into_iter()
        .zip(weights)
        .zip(sources)
        .map(|((round, weights), batch)| SourceInit {
            target_classifier: round.target_classifier,
            source_classifier: round.source_classifier,
            transform: round.transform,
            weights,
            archive: batch.clone(),
        })
        .collect();
    Ok(InitResult {
        sources,
        target_batch: target.clone(),
        beta,
    })
}

/// Initialization ensemble: `Σ_i (cw_i / Σ_j cw_j) · f_Ti(x)`.
pub fn ensemble_init_predict(result: &InitResult, features: &[f64]) -> Result<Vec<f64>> {
    let members = result
        .sources
        .iter()
        .map(|s| Ok((s.target_classifier.predict_proba(features)?, s.classifier_weight())))
        .collect::<Result<Vec<_>>>()?;
    weighted_distribution(&members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{GeneratorKind, Instance, ScenarioConfig};

    #[test]
    fn beta_values() {
        let b = compute_beta(200, 3).unwrap();
        let expected = 0.5 * (1.0 + (2.0 * (200.0f64 / 3.0).ln()).sqrt()).ln();
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 0.6803).abs() < 5e-5);
        let e_ratio = 0.5 * (1.0 + 2f64.sqrt()).ln();
        assert!((e_ratio - 0.4407).abs() < 5e-5);
        assert!(compute_beta(3, 3).is_err());
        assert!(compute_beta(2, 3).is_err());
        assert!(compute_beta(10, 0).is_err());
        assert!(compute_beta(1001, 1000).unwrap() < 0.05);
    }

    #[test]
    fn weight_updates() {
        let beta = compute_beta(200, 3).unwrap();
        assert_eq!(update_correlation_weight(0.7, 1, 1, beta), 0.7);
        let once = update_correlation_weight(1.0, 0, 1, beta);
        assert!((once - 0.5065).abs() < 5e-5);
        let twice = update_correlation_weight(once, 0, 1, beta);
        assert!((twice - 0.2565).abs() < 5e-5);
    }

    #[test]
    fn weighted_distribution_arithmetic() {
        let p = weighted_distribution(&[(vec![1.0, 0.0], 0.9), (vec![0.0, 1.0], 0.1)]).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-12 && (p[1] - 0.1).abs() < 1e-12);
        let p = weighted_distribution(&[(vec![1.0, 0.0], 0.8), (vec![0.0, 1.0], 0.2)]).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12);
        let p = weighted_distribution(&[(vec![0.2, 0.8], 3.0)]).unwrap();
        assert_eq!(p, vec![0.2, 0.8]);
        assert!(weighted_distribution(&[]).is_err());
    }

    fn sea_batches(seed: u64, n_sources: usize, l_n: usize) -> (Vec<DataBatch>, DataBatch) {
        let ms = ScenarioConfig::new(GeneratorKind::Sea, n_sources, 2000, seed).build().unwrap();
        let sources = ms
            .sources
            .iter()
            .map(|s| DataBatch::new(s[..l_n].to_vec(), ms.dim, ms.n_classes).unwrap())
            .collect();
        let target = DataBatch::new(
            ms.target[..l_n].iter().map(|t| t.as_instance()).collect(),
            ms.dim,
            ms.n_classes,
        )
        .unwrap();
        (sources, target)
    }

    #[test]
    fn self_consistent_source_keeps_weights() {
        let (sources, _) = sea_batches(1, 1, 200);
        let unlabeled: Vec<Instance> = sources[0]
            .rows()
            .iter()
            .map(|r| Instance::unlabeled(r.features.clone(), r.timestamp))
            .collect();
        let target = DataBatch::new(unlabeled, 3, 2).unwrap();
        let config = AdaCosaConfig {
            i_max: 1,
            ..AdaCosaConfig::default()
        };
        let result = adacosa_init(&sources, &target, &config).unwrap();
        let w = &result.sources[0].weights;
        let unchanged = w.iter().filter(|v| **v == 1.0).count();
        assert!(unchanged as f64 >= 0.95 * w.len() as f64, "{unchanged}/{}", w.len());
    }

    #[test]
    fn weights_stay_in_unit_interval() {
        let (sources, target) = sea_batches(3, 3, 200);
        let result = adacosa_init(&sources, &target, &AdaCosaConfig::default()).unwrap();
        for s in &result.sources {
            assert_eq!(s.weights.len(), 200);
            assert!(s.weights.iter().all(|w| *w > 0.0 && *w <= 1.0));
        }
        let coef = result.ensemble_coefficients();
        assert!((coef.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p = ensemble_init_predict(&result, &target.rows()[0].features).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_source_ensemble_is_its_target_classifier() {
        let (sources, target) = sea_batches(4, 1, 200);
        let result = adacosa_init(&sources, &target, &AdaCosaConfig::default()).unwrap();
        let x = &target.rows()[5].features;
        assert_eq!(
            ensemble_init_predict(&result, x).unwrap(),
            result.sources[0].target_classifier.predict_proba(x).unwrap()
        );
    }

    #[test]
    fn deterministic() {
        let (sources, target) = sea_batches(5, 2, 200);
        let a = adacosa_init(&sources, &target, &AdaCosaConfig::default()).unwrap();
        let b = adacosa_init(&sources, &target, &AdaCosaConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn without_reweighting_weights_are_uniform() {
        let (sources, target) = sea_batches(6, 2, 200);
        let config = AdaCosaConfig {
            reweighting: false,
            alignment: AlignmentMode::Plain,
            ..AdaCosaConfig::default()
        };
        let result = adacosa_init(&sources, &target, &config).unwrap();
        assert!(result.sources.iter().all(|s| s.weights.iter().all(|w| *w == 1.0)));
        assert!(result.beta.is_none());
    }

    #[test]
    fn input_errors() {
        let (sources, target) = sea_batches(7, 1, 200);
        assert!(adacosa_init(&[], &target, &AdaCosaConfig::default()).is_err());
        let config = AdaCosaConfig {
            i_max: 500,
            ..AdaCosaConfig::default()
        };
        assert!(adacosa_init(&sources, &target, &config).is_err());
        let narrow = DataBatch::new(
            vec![Instance::unlabeled(vec![0.0], 0), Instance::unlabeled(vec![1.0], 1)],
            1,
            2,
        )
        .unwrap();
        assert!(matches!(
            adacosa_init(&sources, &narrow, &AdaCosaConfig::default()),
            Err(ObalError::DimensionMismatch { .. })
        ));
    }
}
