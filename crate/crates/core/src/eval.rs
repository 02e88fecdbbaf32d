//! Experiment running: prequential scoring, ablation variants, multi-seed
//! reports, parameter sweeps and event logs.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adacosa::AlignmentMode;
use crate::engine::{EngineConfig, EngineCounters, Event, EventKind, ObalEngine};
use crate::error::{ObalError, Result};
use crate::streams::{
    build_multistream_scenario, load_csv_stream, CsvSchema, GeneratorKind, GeneratorParams, Instance,
    Multistream, ScenarioConfig,
};

/// Scored predictions per trajectory window.
pub const TRAJECTORY_WINDOW: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    /// Percentage in `[0, 100]`.
    pub overall: f64,
    /// Accuracy of consecutive windows of [`TRAJECTORY_WINDOW`] predictions;
    /// the last window may be shorter.
    pub trajectory: Vec<f64>,
}

/// `100 × matches / total` plus the per-window trajectory.
pub fn prequential_accuracy(predictions: &[usize], labels: &[usize]) -> Result<Accuracy> {
    if predictions.len() != labels.len() {
        return Err(ObalError::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    let hits: Vec<bool> = predictions.iter().zip(labels).map(|(p, y)| p == y).collect();
    let pct = |h: &[bool]| {
        if h.is_empty() {
            0.0
        } else {
            100.0 * h.iter().filter(|v| **v).count() as f64 / h.len() as f64
        }
    };
    Ok(Accuracy {
        overall: pct(&hits),
        trajectory: hits.chunks(TRAJECTORY_WINDOW).map(pct).collect(),
    })
}

/// Ablation variants of the method.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One incrementally updated classifier per source; no drift handling,
    /// no alignment, no re-weighting.
    V1,
    /// Drift handling without alignment or re-weighting.
    V2,
    /// Drift handling with unweighted CORAL alignment.
    V3,
    #[default]
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::V1, Variant::V2, Variant::V3, Variant::Full];

    pub fn apply(self, engine: &EngineConfig) -> EngineConfig {
        let mut e = engine.clone();
        let (alignment, reweighting, drift) = match self {
            Variant::V1 => (AlignmentMode::Off, false, false),
            Variant::V2 => (AlignmentMode::Off, false, true),
            Variant::V3 => (AlignmentMode::Plain, false, true),
            Variant::Full => (AlignmentMode::Weighted, true, true),
        };
        e.alignment = alignment;
        e.reweighting = reweighting;
        e.source_drift = drift;
        e.target_drift = drift;
        e
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::V1 => "v1",
            Variant::V2 => "v2",
            Variant::V3 => "v3",
            Variant::Full => "full",
        })
    }
}

impl FromStr for Variant {
    type Err = ObalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v1" => Ok(Variant::V1),
            "v2" => Ok(Variant::V2),
            "v3" => Ok(Variant::V3),
            "full" | "obal" => Ok(Variant::Full),
            other => Err(ObalError::InvalidConfig(format!("unknown variant '{other}'"))),
        }
    }
}

/// Where the multistream data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Dataset {
    Synthetic {
        generator: GeneratorKind,
        n_sources: usize,
        samples_per_stream: usize,
        /// Defaults to the generator's standard schedule.
        #[serde(default)]
        change_points: Option<Vec<usize>>,
        #[serde(default)]
        params: GeneratorParams,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        schema: CsvSchema,
        n_sources: usize,
        /// `N` source sizes, optionally followed by the target size.
        sizes: Vec<usize>,
    },
    /// Streams recorded separately; the target file's labels are held out.
    CsvStreams {
        sources: Vec<PathBuf>,
        target: PathBuf,
        #[serde(default)]
        schema: CsvSchema,
    },
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset::Synthetic {
            generator: GeneratorKind::Sea,
            n_sources: 3,
            samples_per_stream: 25_000,
            change_points: None,
            params: GeneratorParams::default(),
        }
    }
}

impl Dataset {
    pub fn name(&self) -> String {
        match self {
            Dataset::Synthetic { generator, .. } => generator.to_string(),
            Dataset::Csv { path, .. } | Dataset::CsvStreams { target: path, .. } => path
                .file_stem()
                .map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned()),
        }
    }

    pub fn scenario_config(&self, seed: u64) -> Option<ScenarioConfig> {
        match self {
            Dataset::Synthetic {
                generator,
                n_sources,
                samples_per_stream,
                change_points,
                params,
            } => {
                let mut sc = ScenarioConfig::new(*generator, *n_sources, *samples_per_stream, seed);
                if let Some(cp) = change_points {
                    sc.change_points = cp.clone();
                }
                sc.params = params.clone();
                Some(sc)
            }
            Dataset::Csv { .. } | Dataset::CsvStreams { .. } => None,
        }
    }

    /// Builds the multistream for one seed. CSV splits do not depend on it.
    pub fn build(&self, seed: u64) -> Result<Multistream> {
        match self {
            Dataset::Synthetic { .. } => self.scenario_config(seed).expect("synthetic").build(),
            Dataset::Csv {
                path,
                schema,
                n_sources,
                sizes,
            } => build_multistream_scenario(load_csv_stream(path, schema)?, *n_sources, sizes),
            Dataset::CsvStreams {
                sources,
                target,
                schema,
            } => {
                let sources = sources
                    .iter()
                    .map(|p| load_csv_stream(p, schema))
                    .collect::<Result<Vec<_>>>()?;
                multistream_from_streams(sources, load_csv_stream(target, schema)?)
            }
        }
    }
}

/// Assembles a multistream from separately recorded labeled streams.
pub fn multistream_from_streams(sources: Vec<Vec<Instance>>, target: Vec<Instance>) -> Result<Multistream> {
    let first = target.first().ok_or(ObalError::EmptyTarget)?;
    let dim = first.dim();
    let mut n_classes = 0;
    for inst in sources.iter().flatten().chain(&target) {
        if inst.dim() != dim {
            return Err(ObalError::DimensionMismatch {
                expected: dim,
                actual: inst.dim(),
            });
        }
        let y = inst.label.ok_or(ObalError::MissingLabel)?;
        n_classes = n_classes.max(y + 1);
    }
    if sources.is_empty() {
        return Err(ObalError::InvalidConfig("at least one source stream is required".into()));
    }
    let held_out = target.iter().map(|i| i.label.expect("checked above")).collect();
    Ok(Multistream {
        sources,
        target: target.into_iter().map(Instance::into_target).collect(),
        held_out,
        dim,
        n_classes: n_classes.max(2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub engine: EngineConfig,
    pub variant: Variant,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: Dataset::default(),
            engine: EngineConfig::default(),
            variant: Variant::Full,
            seeds: (0..10).collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(ObalError::InvalidConfig("at least one seed is required".into()));
        }
        self.variant.apply(&self.engine).validate()?;
        if let Some(sc) = self.dataset.scenario_config(0) {
            sc.validate()?;
        }
        Ok(())
    }
}

/// Result of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub accuracy: f64,
    /// Accuracy over predictions not made by a stale ensemble.
    pub accuracy_excluding_stale: f64,
    pub predictions: usize,
    pub stale_predictions: usize,
    pub trajectory: Vec<f64>,
    pub counters: EngineCounters,
    /// Predicted label per target instance; `None` during the first
    /// initialization batch.
    #[serde(skip)]
    pub predicted: Vec<Option<usize>>,
    #[serde(skip)]
    pub events: Vec<Event>,
}

/// Streams all instances through one engine in lockstep: at every step each
/// source instance is processed before the target instance.
pub fn run_on_multistream(ms: &Multistream, engine_config: &EngineConfig) -> Result<SeedResult> {
    let mut engine = ObalEngine::new(engine_config.clone(), ms.n_sources(), ms.dim, ms.n_classes)?;
    let steps = ms
        .sources
        .iter()
        .map(Vec::len)
        .chain(std::iter::once(ms.target.len()))
        .max()
        .unwrap_or(0);
    let mut predicted = vec![None; ms.target.len()];
    let mut stale = vec![false; ms.target.len()];
    let mut events = Vec::new();
    for t in 0..steps {
        for (i, s) in ms.sources.iter().enumerate() {
            if let Some(inst) = s.get(t) {
                engine.process_source(i, inst)?;
            }
        }
        if let Some(inst) = ms.target.get(t) {
            let out = engine.process_target(inst)?;
            predicted[t] = out.prediction;
            stale[t] = out.stale;
        }
        events.extend(engine.drain_events());
    }
    // Only the evaluator reads held-out labels.
    let (mut preds, mut labels, mut fresh_preds, mut fresh_labels) = (vec![], vec![], vec![], vec![]);
    for ((p, s), y) in predicted.iter().zip(&stale).zip(&ms.held_out) {
        if let Some(p) = p {
            preds.push(*p);
            labels.push(*y);
            if !s {
                fresh_preds.push(*p);
                fresh_labels.push(*y);
            }
        }
    }
    let acc = prequential_accuracy(&preds, &labels)?;
    let fresh = prequential_accuracy(&fresh_preds, &fresh_labels)?;
    Ok(SeedResult {
        seed: engine_config.seed,
        accuracy: acc.overall,
        accuracy_excluding_stale: fresh.overall,
        predictions: preds.len(),
        stale_predictions: preds.len() - fresh_preds.len(),
        trajectory: acc.trajectory,
        counters: engine.counters().clone(),
        predicted,
        events,
    })
}

pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedResult> {
    let ms = config.dataset.build(seed)?;
    let mut engine = config.variant.apply(&config.engine);
    engine.seed = seed;
    run_on_multistream(&ms, &engine)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub dataset: String,
    pub variant: Variant,
    pub seeds: Vec<SeedResult>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over seeds.
    pub std_over_seeds: f64,
    pub mean_accuracy_excluding_stale: f64,
    pub wall_clock_secs: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Runs every seed (in parallel) and aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = std::time::Instant::now();
    let seeds = config
        .seeds
        .par_iter()
        .map(|&s| run_seed(config, s))
        .collect::<Result<Vec<_>>>()?;
    let acc: Vec<f64> = seeds.iter().map(|s| s.accuracy).collect();
    let fresh: Vec<f64> = seeds.iter().map(|s| s.accuracy_excluding_stale).collect();
    let (mean_accuracy, std_over_seeds) = mean_std(&acc);
    Ok(Report {
        dataset: config.dataset.name(),
        variant: config.variant,
        seeds,
        mean_accuracy,
        std_over_seeds,
        mean_accuracy_excluding_stale: mean_std(&fresh).0,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

pub const REPORT_COLUMNS: [&str; 12] = [
    "row",
    "dataset",
    "variant",
    "accuracy",
    "accuracy_excluding_stale",
    "predictions",
    "stale_predictions",
    "source_drifts",
    "target_drifts",
    "reinits",
    "pool_evictions",
    "max_pool_size",
];

impl Report {
    /// CSV with one row per seed, then `mean` and `std` rows. Wall-clock
    /// time is left out so fixed seeds give byte-identical files.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_COLUMNS)?;
        let f = |v: f64| format!("{v:.6}");
        for s in &self.seeds {
            let c = &s.counters;
            w.write_record([
                format!("seed_{}", s.seed),
                self.dataset.clone(),
                self.variant.to_string(),
                f(s.accuracy),
                f(s.accuracy_excluding_stale),
                s.predictions.to_string(),
                s.stale_predictions.to_string(),
                c.source_drifts.to_string(),
                c.target_drifts.to_string(),
                c.reinits.to_string(),
                c.pool_evictions.to_string(),
                c.max_pool_size.to_string(),
            ])?;
        }
        let col = |g: &dyn Fn(&SeedResult) -> f64| mean_std(&self.seeds.iter().map(g).collect::<Vec<_>>());
        let stats = [
            col(&|s| s.accuracy),
            col(&|s| s.accuracy_excluding_stale),
            col(&|s| s.predictions as f64),
            col(&|s| s.stale_predictions as f64),
            col(&|s| s.counters.source_drifts as f64),
            col(&|s| s.counters.target_drifts as f64),
            col(&|s| s.counters.reinits as f64),
            col(&|s| s.counters.pool_evictions as f64),
            col(&|s| s.counters.max_pool_size as f64),
        ];
        for (name, pick) in [("mean", 0usize), ("std", 1)] {
            let mut rec = vec![name.to_string(), self.dataset.clone(), self.variant.to_string()];
            rec.extend(stats.iter().map(|st| f(if pick == 0 { st.0 } else { st.1 })));
            w.write_record(rec)?;
        }
        w.flush().map_err(|e| ObalError::io(Path::new("<csv>"), e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    LN,
    IMax,
    PoolSize,
}

impl FromStr for SweepParameter {
    type Err = ObalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "l_n" | "ln" => Ok(SweepParameter::LN),
            "i_max" | "imax" => Ok(SweepParameter::IMax),
            "pool_size" | "p" => Ok(SweepParameter::PoolSize),
            other => Err(ObalError::UnknownParameter(other.to_string())),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::LN => "l_n",
            SweepParameter::IMax => "i_max",
            SweepParameter::PoolSize => "pool_size",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: usize,
    pub report: Report,
}

/// One report per value, other parameters fixed.
pub fn parameter_sweep(base: &ExperimentConfig, parameter: SweepParameter, values: &[usize]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(ObalError::InvalidConfig("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            match parameter {
                SweepParameter::LN => c.engine.l_n = v,
                SweepParameter::IMax => c.engine.i_max = v,
                SweepParameter::PoolSize => c.engine.pool_size = v,
            }
            Ok(SweepRow {
                parameter,
                value: v,
                report: run_experiment(&c)?,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "parameter",
        "value",
        "dataset",
        "variant",
        "mean_accuracy",
        "std_over_seeds",
        "mean_accuracy_excluding_stale",
        "max_pool_size",
        "n_seeds",
    ])?;
    for r in rows {
        let max_pool = r.report.seeds.iter().map(|s| s.counters.max_pool_size).max().unwrap_or(0);
        w.write_record([
            r.parameter.to_string(),
            r.value.to_string(),
            r.report.dataset.clone(),
            r.report.variant.to_string(),
            format!("{:.6}", r.report.mean_accuracy),
            format!("{:.6}", r.report.std_over_seeds),
            format!("{:.6}", r.report.mean_accuracy_excluding_stale),
            max_pool.to_string(),
            r.report.seeds.len().to_string(),
        ])?;
    }
    w.flush().map_err(|e| ObalError::io(Path::new("<csv>"), e))?;
    Ok(())
}

/// Writes events as newline-delimited JSON.
pub fn write_event_log<W: Write>(events: &[Event], mut out: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n").map_err(|e| ObalError::io(Path::new("<event log>"), e))?;
    }
    Ok(())
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| ObalError::io(Path::new("<event log>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

/// Event counts per stream and kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub total: usize,
    pub first_t: Option<u64>,
    pub last_t: Option<u64>,
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
    /// Fraction of logged predictions flagged stale.
    pub stale_fraction: Option<f64>,
}

pub fn summarize_events(events: &[Event]) -> EventSummary {
    let mut s = EventSummary {
        total: events.len(),
        ..EventSummary::default()
    };
    let (mut preds, mut stale) = (0usize, 0usize);
    for e in events {
        s.first_t = Some(s.first_t.map_or(e.t, |v| v.min(e.t)));
        s.last_t = Some(s.last_t.map_or(e.t, |v| v.max(e.t)));
        let kind = serde_json::to_value(e.event)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        *s.counts.entry(e.stream.clone()).or_default().entry(kind).or_default() += 1;
        if e.event == EventKind::Prediction {
            preds += 1;
            if e.payload.get("stale").and_then(|v| v.as_bool()) == Some(true) {
                stale += 1;
            }
        }
    }
    if preds > 0 {
        s.stale_fraction = Some(stale as f64 / preds as f64);
    }
    s
}

impl fmt::Display for EventSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "events: {}", self.total)?;
        if let (Some(a), Some(b)) = (self.first_t, self.last_t) {
            writeln!(f, "time span: {a}..={b}")?;
        }
        for (stream, kinds) in &self.counts {
            let parts: Vec<String> = kinds.iter().map(|(k, n)| format!("{k}={n}")).collect();
            writeln!(f, "{stream}: {}", parts.join(" "))?;
        }
        if let Some(x) = self.stale_fraction {
            writeln!(f, "stale predictions: {:.2}%", 100.0 * x)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn accuracy_examples() {
        assert_eq!(prequential_accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap().overall, 100.0);
        let alt: Vec<usize> = (0..10).map(|i| i % 2).collect();
        assert_eq!(prequential_accuracy(&alt, &[0; 10]).unwrap().overall, 50.0);
        let mut nine = vec![1; 10];
        nine[3] = 0;
        assert_eq!(prequential_accuracy(&nine, &[1; 10]).unwrap().overall, 90.0);
        assert!(matches!(
            prequential_accuracy(&[1], &[1, 1]),
            Err(ObalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn trajectory_matches_overall() {
        let preds: Vec<usize> = (0..3000).map(|i| usize::from(i % 7 == 0)).collect();
        let labels = vec![0; 3000];
        let acc = prequential_accuracy(&preds, &labels).unwrap();
        assert_eq!(acc.trajectory.len(), 3);
        let mean = acc.trajectory.iter().sum::<f64>() / 3.0;
        assert!((mean - acc.overall).abs() < 1e-9);
        let short = prequential_accuracy(&preds[..2500], &labels[..2500]).unwrap();
        assert_eq!(short.trajectory.len(), 3);
    }

    #[test]
    fn variant_switches() {
        let base = EngineConfig::default();
        let v1 = Variant::V1.apply(&base);
        assert!(!v1.source_drift && !v1.target_drift && !v1.reweighting);
        assert_eq!(v1.alignment, AlignmentMode::Off);
        let v3 = Variant::V3.apply(&base);
        assert!(v3.source_drift && !v3.reweighting);
        assert_eq!(v3.alignment, AlignmentMode::Plain);
        assert_eq!("V2".parse::<Variant>().unwrap(), Variant::V2);
        assert!("v9".parse::<Variant>().is_err());
    }

    #[test]
    fn sweep_parameter_names() {
        assert_eq!("L_n".parse::<SweepParameter>().unwrap(), SweepParameter::LN);
        assert_eq!("pool-size".parse::<SweepParameter>().unwrap(), SweepParameter::PoolSize);
        assert!(matches!(
            "gamma".parse::<SweepParameter>(),
            Err(ObalError::UnknownParameter(_))
        ));
    }

    #[test]
    fn event_log_round_trip_and_summary() {
        let events = vec![
            Event {
                t: 3,
                stream: "source_0".into(),
                event: EventKind::SourceDrift,
                payload: json!({"aw": 0.5}),
            },
            Event {
                t: 4,
                stream: "target".into(),
                event: EventKind::Prediction,
                payload: json!({"label": 1, "stale": true}),
            },
            Event {
                t: 5,
                stream: "target".into(),
                event: EventKind::Prediction,
                payload: json!({"label": 0, "stale": false}),
            },
        ];
        let mut buf = Vec::new();
        write_event_log(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("{\"t\":3,\"stream\":\"source_0\",\"event\":\"source_drift\""));
        let back = read_event_log(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, events);
        let s = summarize_events(&back);
        assert_eq!(s.total, 3);
        assert_eq!(s.counts["target"]["prediction"], 2);
        assert_eq!(s.stale_fraction, Some(0.5));
        assert_eq!((s.first_t, s.last_t), (Some(3), Some(5)));
    }

    #[test]
    fn experiment_config_toml() {
        let c = ExperimentConfig::from_toml(
            r#"
            variant = "v3"
            seeds = [1, 2]
            [dataset]
            type = "synthetic"
            generator = "hyperplane"
            n_sources = 2
            samples_per_stream = 500
            [engine]
            l_n = 100
            pool_size = 10
            "#,
        )
        .unwrap();
        assert_eq!(c.variant, Variant::V3);
        assert_eq!(c.engine.l_n, 100);
        assert_eq!(c.engine.i_max, 3);
        assert!(c.validate().is_ok());
        let empty = ExperimentConfig {
            seeds: vec![],
            ..ExperimentConfig::default()
        };
        assert!(empty.validate().is_err());
    }
}
