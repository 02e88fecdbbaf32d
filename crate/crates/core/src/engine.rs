//! The online engine: per-instance source processing with drift detection,
//! GMM importance weighting and weighted alignment, target prediction by a
//! weighted ensemble of live and pooled classifiers, and full
//! re-initialization on target drift.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adacosa::{adacosa_init, weighted_distribution, AdaCosaConfig, AlignmentMode};
use crate::drift::{DdmState, DriftStatus, TargetDriftState, WindowTest};
use crate::error::{ObalError, Result};
use crate::gmm::{fit_gmm_with, ComponentCount, EmConfig, GmmModel};
use crate::learners::{argmax, BaseLearner, Classifier, LearnerKind};
use crate::linalg::{coral_transform, covariance_of_rows, regularized_covariance, AlignmentTransform, CovMatrix};
use crate::streams::{DataBatch, Instance, TargetInstance};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Initialization batch size, also the target window length.
    pub l_n: usize,
    pub i_max: usize,
    pub pool_size: usize,
    pub components: ComponentCount,
    pub em: EmConfig,
    pub window_test: WindowTest,
    pub z: f64,
    pub alignment: AlignmentMode,
    pub reweighting: bool,
    /// DDM on sources, pooling and GMM importance weights.
    pub source_drift: bool,
    /// Target window test and re-initialization.
    pub target_drift: bool,
    pub learner: LearnerKind,
    pub seed: u64,
    /// Emit a `prediction` event per target instance.
    pub log_predictions: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            l_n: 200,
            i_max: 3,
            pool_size: 5,
            components: ComponentCount::default(),
            em: EmConfig::default(),
            window_test: WindowTest::TwoSided,
            z: 3.0,
            alignment: AlignmentMode::Weighted,
            reweighting: true,
            source_drift: true,
            target_drift: true,
            learner: LearnerKind::default(),
            seed: 0,
            log_predictions: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_n < 2 {
            return Err(ObalError::InvalidConfig("L_n must be at least 2".into()));
        }
        if self.i_max == 0 {
            return Err(ObalError::InvalidConfig("I_max must be at least 1".into()));
        }
        if self.reweighting {
            crate::adacosa::compute_beta(self.l_n, self.i_max)?;
        }
        if self.pool_size == 0 {
            return Err(ObalError::InvalidConfig("pool size must be at least 1".into()));
        }
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(ObalError::InvalidConfig(format!("invalid z value {}", self.z)));
        }
        self.learner.validate()
    }

    fn adacosa(&self) -> AdaCosaConfig {
        AdaCosaConfig {
            i_max: self.i_max,
            alignment: self.alignment,
            reweighting: self.reweighting,
            learner: self.learner.clone(),
        }
    }

    fn em_for(&self, stream_offset: u64) -> EmConfig {
        EmConfig {
            seed: self.seed.wrapping_add(stream_offset),
            ..self.em.clone()
        }
    }
}

/// Nearest archived instance by Euclidean distance; ties go to the earliest.
pub fn retrieve_correlation_weight(archive: &[Instance], weights: &[f64], features: &[f64]) -> Result<f64> {
    if archive.is_empty() {
        return Err(ObalError::EmptyArchive);
    }
    if archive.len() != weights.len() {
        return Err(ObalError::LengthMismatch {
            left: archive.len(),
            right: weights.len(),
        });
    }
    let mut best = (f64::INFINITY, 0);
    for (i, row) in archive.iter().enumerate() {
        if row.features.len() != features.len() {
            return Err(ObalError::DimensionMismatch {
                expected: row.features.len(),
                actual: features.len(),
            });
        }
        let d: f64 = row.features.iter().zip(features).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(weights[best.1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub classifier: BaseLearner,
    pub weight: f64,
    pub source: usize,
    /// Insertion order; smaller is older.
    pub serial: u64,
    pub created_at: u64,
}

/// Frozen classifiers kept after source drift, bounded by capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPool {
    capacity: usize,
    entries: Vec<PoolEntry>,
    next_serial: u64,
}

impl ClassifierPool {
    pub fn new(capacity: usize) -> Self {
        ClassifierPool {
            capacity,
            entries: Vec::new(),
            next_serial: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Inserts a frozen classifier. Over capacity, the lowest-weight entry is
    /// evicted (ties: oldest) and returned; it may be the newcomer.
    pub fn archive_classifier(
        &mut self,
        classifier: BaseLearner,
        weight: f64,
        source: usize,
        created_at: u64,
    ) -> Result<Option<PoolEntry>> {
        if !(weight >= 0.0) {
            return Err(ObalError::NegativeWeight(weight));
        }
        self.entries.push(PoolEntry {
            classifier,
            weight,
            source,
            serial: self.next_serial,
            created_at,
        });
        self.next_serial += 1;
        if self.entries.len() <= self.capacity {
            return Ok(None);
        }
        let victim = self
            .entries
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.weight.total_cmp(&b.weight).then(a.serial.cmp(&b.serial)))
            .map(|(i, _)| i)
            .expect("pool is nonempty");
        Ok(Some(self.entries.remove(victim)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Prediction,
    SourceDrift,
    TargetDrift,
    Reinit,
    PoolEvict,
}

/// One record of the structured event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    pub stream: String,
    pub event: EventKind,
    pub payload: serde_json::Value,
}

fn source_name(i: usize) -> String {
    format!("source_{i}")
}

const TARGET_NAME: &str = "target";

/// Online state of one source stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceState {
    pub target_classifier: BaseLearner,
    pub source_classifier: BaseLearner,
    pub ddm: DdmState,
    pub gmm: GmmModel,
    pub transform: AlignmentTransform,
    pub archive: Vec<Instance>,
    pub archive_weights: Vec<f64>,
    /// Most recent `L_n` instances, for refitting the transform.
    pub recent: VecDeque<Instance>,
    /// Scalar weight from initialization, used before any online instance.
    pub init_weight: f64,
    acc_sum: f64,
    acc_n: u64,
    pub created_at: u64,
}

impl SourceState {
    /// `w_Si = (1/n) Σ aw·cw` since the current classifier was created.
    pub fn ensemble_weight(&self) -> f64 {
        if self.acc_n == 0 {
            self.init_weight
        } else {
            self.acc_sum / self.acc_n as f64
        }
    }

    fn accumulate(&mut self, value: f64) {
        self.acc_sum += value;
        self.acc_n += 1;
    }

    fn reset_accumulator(&mut self) {
        self.acc_sum = 0.0;
        self.acc_n = 0;
    }
}

/// Outcome of processing one source instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceOutcome {
    pub status: Option<DriftStatus>,
    pub drift: bool,
    pub training_weight: Option<f64>,
}

/// Outcome of processing one target instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetOutcome {
    /// `None` while the very first initialization batch is buffered.
    pub prediction: Option<usize>,
    pub distribution: Option<Vec<f64>>,
    /// Predicted by the ensemble frozen at the last target drift.
    pub stale: bool,
    pub drift: bool,
    pub reinitialized: bool,
}

/// Classifiers frozen at a target drift, predicting while the engine buffers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StaleEnsemble {
    members: Vec<(BaseLearner, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Online {
    sources: Vec<SourceState>,
    pool: ClassifierPool,
    target_gmm: GmmModel,
    target_cov: CovMatrix,
    detector: TargetDriftState,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineCounters {
    pub source_drifts: u64,
    pub target_drifts: u64,
    pub reinits: u64,
    pub pool_evictions: u64,
    pub classifiers_created: u64,
    pub max_pool_size: usize,
}

/// The full online machine for `N` labeled sources and one unlabeled target.
///
/// A new engine first buffers `L_n` instances per stream, then initializes.
/// After a target drift it drops every classifier and repeats the same
/// buffering, so a re-initialized engine equals a fresh one started at that
/// stream position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObalEngine {
    config: EngineConfig,
    dim: usize,
    n_classes: usize,
    source_buffers: Vec<VecDeque<Instance>>,
    target_buffer: VecDeque<TargetInstance>,
    online: Option<Online>,
    stale: Option<StaleEnsemble>,
    counters: EngineCounters,
    #[serde(skip)]
    events: Vec<Event>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    engine: ObalEngine,
}

impl ObalEngine {
    pub fn new(config: EngineConfig, n_sources: usize, dim: usize, n_classes: usize) -> Result<Self> {
        config.validate()?;
        if n_sources == 0 {
            return Err(ObalError::InvalidConfig("at least one source stream is required".into()));
        }
        if dim == 0 || n_classes < 2 {
            return Err(ObalError::InvalidConfig("need d ≥ 1 and at least two classes".into()));
        }
        Ok(ObalEngine {
            config,
            dim,
            n_classes,
            source_buffers: vec![VecDeque::new(); n_sources],
            target_buffer: VecDeque::new(),
            online: None,
            stale: None,
            counters: EngineCounters::default(),
            events: Vec::new(),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn n_sources(&self) -> usize {
        self.source_buffers.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn is_initialized(&self) -> bool {
        self.online.is_some()
    }

    /// True while instances are collected for a (re-)initialization.
    pub fn is_buffering(&self) -> bool {
        self.online.is_none()
    }

    pub fn counters(&self) -> &EngineCounters {
        &self.counters
    }

    pub fn pool(&self) -> Option<&ClassifierPool> {
        self.online.as_ref().map(|o| &o.pool)
    }

    pub fn source_state(&self, i: usize) -> Option<&SourceState> {
        self.online.as_ref().and_then(|o| o.sources.get(i))
    }

    pub fn target_gmm(&self) -> Option<&GmmModel> {
        self.online.as_ref().map(|o| &o.target_gmm)
    }

    pub fn target_detector(&self) -> Option<&TargetDriftState> {
        self.online.as_ref().map(|o| &o.detector)
    }

    pub fn drain_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    fn emit(&mut self, t: u64, stream: String, event: EventKind, payload: serde_json::Value) {
        self.events.push(Event {
            t,
            stream,
            event,
            payload,
        });
    }

    fn check_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.dim {
            return Err(ObalError::DimensionMismatch {
                expected: self.dim,
                actual: features.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(ObalError::NonFinite("instance features".into()));
        }
        Ok(())
    }

    /// Processes one labeled source instance.
    pub fn process_source(&mut self, index: usize, instance: &Instance) -> Result<SourceOutcome> {
        let n_sources = self.n_sources();
        if index >= n_sources {
            return Err(ObalError::UnknownSource { index, n_sources });
        }
        self.check_features(&instance.features)?;
        let label = instance.label.ok_or(ObalError::MissingLabel)?;
        if label >= self.n_classes {
            return Err(ObalError::LabelOutOfRange {
                label,
                n_classes: self.n_classes,
            });
        }
        if self.online.is_none() {
            let buf = &mut self.source_buffers[index];
            buf.push_back(instance.clone());
            if buf.len() > self.config.l_n {
                buf.pop_front();
            }
            self.maybe_initialize()?;
            return Ok(SourceOutcome {
                status: None,
                drift: false,
                training_weight: None,
            });
        }

        let config = self.config.clone();
        let online = self.online.as_mut().expect("initialized");
        let state = &mut online.sources[index];
        state.recent.push_back(instance.clone());
        if state.recent.len() > config.l_n {
            state.recent.pop_front();
        }

        let predicted = state.source_classifier.predict(&instance.features)?;
        let status = if config.source_drift {
            state.ddm.update(predicted == label)
        } else {
            DriftStatus::Stable
        };
        let cw = if config.reweighting {
            retrieve_correlation_weight(&state.archive, &state.archive_weights, &instance.features)?
        } else {
            1.0
        };
        let feature_weight = if config.alignment == AlignmentMode::Weighted { cw } else { 1.0 };

        if status != DriftStatus::Drift {
            let aligned = state.transform.apply_row(&instance.features, feature_weight)?;
            state.target_classifier.train(&aligned, label, cw)?;
            state.source_classifier.train(&instance.features, label, 1.0)?;
            state.accumulate(cw);
            return Ok(SourceOutcome {
                status: Some(status),
                drift: false,
                training_weight: Some(cw),
            });
        }

        let w_p = state.ensemble_weight();
        let aw = state.gmm.normalized_max_likelihood(&instance.features)?;
        let old_created = state.created_at;
        state.transform = refit_transform(
            state.recent.iter(),
            &state.archive,
            &state.archive_weights,
            &online.target_cov,
            &config,
        )?;
        let fresh_target = config.learner.build(self.dim, self.n_classes);
        let frozen = std::mem::replace(&mut state.target_classifier, fresh_target);
        state.source_classifier = config.learner.build(self.dim, self.n_classes);
        let aligned = state.transform.apply_row(&instance.features, feature_weight)?;
        state.target_classifier.train(&aligned, label, aw * cw)?;
        state.source_classifier.train(&instance.features, label, 1.0)?;
        state.reset_accumulator();
        state.accumulate(aw * cw);
        state.created_at = instance.timestamp;
        let evicted = online.pool.archive_classifier(frozen, w_p, index, old_created)?;
        let pool_len = online.pool.len();

        self.counters.source_drifts += 1;
        self.counters.classifiers_created += 1;
        self.counters.max_pool_size = self.counters.max_pool_size.max(pool_len);
        self.emit(
            instance.timestamp,
            source_name(index),
            EventKind::SourceDrift,
            json!({ "pooled_weight": w_p, "aw": aw, "cw": cw, "pool_size": pool_len }),
        );
        if let Some(e) = evicted {
            self.counters.pool_evictions += 1;
            self.emit(
                instance.timestamp,
                source_name(index),
                EventKind::PoolEvict,
                json!({ "weight": e.weight, "source": e.source, "created_at": e.created_at }),
            );
        }
        Ok(SourceOutcome {
            status: Some(status),
            drift: true,
            training_weight: Some(aw * cw),
        })
    }

    /// Processes one unlabeled target instance.
    pub fn process_target(&mut self, instance: &TargetInstance) -> Result<TargetOutcome> {
        self.check_features(&instance.features)?;
        if self.online.is_none() {
            let distribution = match &self.stale {
                Some(stale) => Some(stale_predict(stale, &instance.features)?),
                None => None,
            };
            self.target_buffer.push_back(instance.clone());
            if self.target_buffer.len() > self.config.l_n {
                self.target_buffer.pop_front();
            }
            let reinitialized = self.maybe_initialize()?;
            let prediction = distribution.as_deref().map(argmax);
            if let Some(p) = prediction {
                self.log_prediction(instance.timestamp, p, true);
            }
            return Ok(TargetOutcome {
                prediction,
                distribution,
                stale: prediction.is_some(),
                drift: false,
                reinitialized,
            });
        }

        let config = self.config.clone();
        let online = self.online.as_mut().expect("initialized");
        if config.target_drift {
            let likelihood = online.target_gmm.max_component_likelihood(&instance.features)?;
            if online.detector.update(likelihood)? {
                let stats = online.detector.last_stats();
                let stale = freeze_ensemble(online);
                let distribution = stale_predict(&stale, &instance.features)?;
                self.stale = Some(stale);
                self.online = None;
                self.counters.target_drifts += 1;
                self.emit(
                    instance.timestamp,
                    TARGET_NAME.into(),
                    EventKind::TargetDrift,
                    json!({
                        "mu_ref": stats.map(|s| s.mu_ref),
                        "mu_det": stats.map(|s| s.mu_det),
                        "sigma": stats.map(|s| s.sigma),
                    }),
                );
                for b in &mut self.source_buffers {
                    b.clear();
                }
                self.target_buffer.clear();
                self.target_buffer.push_back(instance.clone());
                let prediction = argmax(&distribution);
                self.log_prediction(instance.timestamp, prediction, true);
                return Ok(TargetOutcome {
                    prediction: Some(prediction),
                    distribution: Some(distribution),
                    stale: true,
                    drift: true,
                    reinitialized: false,
                });
            }
        }
        let distribution = ensemble_distribution(online, &instance.features)?;
        let prediction = argmax(&distribution);
        self.log_prediction(instance.timestamp, prediction, false);
        Ok(TargetOutcome {
            prediction: Some(prediction),
            distribution: Some(distribution),
            stale: false,
            drift: false,
            reinitialized: false,
        })
    }

    fn log_prediction(&mut self, t: u64, prediction: usize, stale: bool) {
        if self.config.log_predictions {
            self.emit(
                t,
                TARGET_NAME.into(),
                EventKind::Prediction,
                json!({ "label": prediction, "stale": stale }),
            );
        }
    }

    /// Live ensemble distribution for `features`.
    pub fn ensemble_predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_features(features)?;
        let online = self.online.as_ref().ok_or(ObalError::NotInitialized)?;
        ensemble_distribution(online, features)
    }

    fn maybe_initialize(&mut self) -> Result<bool> {
        let l_n = self.config.l_n;
        if self.target_buffer.len() < l_n || self.source_buffers.iter().any(|b| b.len() < l_n) {
            return Ok(false);
        }
        let sources: Vec<DataBatch> = self
            .source_buffers
            .iter()
            .map(|b| DataBatch::new(b.iter().cloned().collect(), self.dim, self.n_classes))
            .collect::<Result<_>>()?;
        let target = DataBatch::new(
            self.target_buffer.iter().map(TargetInstance::as_instance).collect(),
            self.dim,
            self.n_classes,
        )?;
        let t = self.target_buffer.back().map_or(0, |i| i.timestamp);
        let online = initialize(&self.config, &sources, &target)?;
        let weights: Vec<f64> = online.sources.iter().map(|s| s.init_weight).collect();
        self.counters.classifiers_created += online.sources.len() as u64;
        self.online = Some(online);
        self.stale = None;
        for b in &mut self.source_buffers {
            b.clear();
        }
        self.target_buffer.clear();
        self.counters.reinits += 1;
        self.emit(t, TARGET_NAME.into(), EventKind::Reinit, json!({ "classifier_weights": weights }));
        Ok(true)
    }

    pub fn to_checkpoint(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            format_version: u32,
            engine: &'a ObalEngine,
        }
        Ok(serde_json::to_string(&Out {
            format_version: CHECKPOINT_VERSION,
            engine: self,
        })?)
    }

    pub fn from_checkpoint(json: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(json)?;
        let found = v.get("format_version").and_then(|f| f.as_u64()).unwrap_or(0) as u32;
        if found != CHECKPOINT_VERSION {
            return Err(ObalError::FormatVersion {
                found,
                expected: CHECKPOINT_VERSION,
            });
        }
        let c: Checkpoint = serde_json::from_value(v)?;
        Ok(c.engine)
    }
}

fn initialize(config: &EngineConfig, sources: &[DataBatch], target: &DataBatch) -> Result<Online> {
    let init = adacosa_init(sources, target, &config.adacosa())?;
    let target_rows = target.features();
    let target_gmm = fit_gmm_with(&target_rows, target.dim(), config.components, &config.em_for(0))?;
    let target_cov = regularized_covariance(target, None)?;
    let states = init
        .sources
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let rows = s.archive.features();
            let gmm = fit_gmm_with(&rows, s.archive.dim(), config.components, &config.em_for(1 + i as u64))?;
            let init_weight = s.classifier_weight();
            let archive: Vec<Instance> = s.archive.rows().to_vec();
            let created_at = archive.last().map_or(0, |r| r.timestamp);
            Ok(SourceState {
                target_classifier: s.target_classifier,
                source_classifier: s.source_classifier,
                ddm: DdmState::new(),
                gmm,
                transform: s.transform,
                recent: archive.iter().cloned().collect(),
                archive,
                archive_weights: s.weights,
                init_weight,
                acc_sum: 0.0,
                acc_n: 0,
                created_at,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Online {
        sources: states,
        pool: ClassifierPool::new(config.pool_size),
        target_gmm,
        target_cov,
        detector: TargetDriftState::new(config.l_n, config.z, config.window_test)?,
    })
}

fn refit_transform<'a>(
    recent: impl Iterator<Item = &'a Instance>,
    archive: &[Instance],
    archive_weights: &[f64],
    target_cov: &CovMatrix,
    config: &EngineConfig,
) -> Result<AlignmentTransform> {
    let rows: Vec<&Instance> = recent.collect();
    let dim = target_cov.dim();
    match config.alignment {
        AlignmentMode::Off => Ok(AlignmentTransform::identity(dim)),
        AlignmentMode::Plain | AlignmentMode::Weighted => {
            let features: Vec<&[f64]> = rows.iter().map(|r| r.features.as_slice()).collect();
            let weights = if config.alignment == AlignmentMode::Weighted && config.reweighting {
                Some(
                    rows.iter()
                        .map(|r| retrieve_correlation_weight(archive, archive_weights, &r.features))
                        .collect::<Result<Vec<f64>>>()?,
                )
            } else {
                None
            };
            let cov = covariance_of_rows(&features, dim, weights.as_deref())?;
            coral_transform(&cov, target_cov)
        }
    }
}

fn ensemble_distribution(online: &Online, features: &[f64]) -> Result<Vec<f64>> {
    let mut members = Vec::with_capacity(online.sources.len() + online.pool.len());
    for s in &online.sources {
        if s.target_classifier.is_trained() {
            members.push((s.target_classifier.predict_proba(features)?, s.ensemble_weight()));
        }
    }
    for e in online.pool.entries() {
        members.push((e.classifier.predict_proba(features)?, e.weight));
    }
    weighted_distribution(&members)
}

fn freeze_ensemble(online: &Online) -> StaleEnsemble {
    let mut members: Vec<(BaseLearner, f64)> = online
        .sources
        .iter()
        .filter(|s| s.target_classifier.is_trained())
        .map(|s| (s.target_classifier.clone(), s.ensemble_weight()))
        .collect();
    members.extend(online.pool.entries().iter().map(|e| (e.classifier.clone(), e.weight)));
    StaleEnsemble { members }
}

fn stale_predict(stale: &StaleEnsemble, features: &[f64]) -> Result<Vec<f64>> {
    let members = stale
        .members
        .iter()
        .map(|(c, w)| Ok((c.predict_proba(features)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    weighted_distribution(&members)
}
