use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use obal::drift::WindowTest;
use obal::eval::{
    parameter_sweep, read_event_log, run_experiment, summarize_events, write_event_log, write_sweep_csv, Dataset,
    ExperimentConfig, Report, SweepParameter, Variant,
};
use obal::gmm::ComponentCount;
use obal::learners::LearnerKind;
use obal::streams::{CsvSchema, GeneratorKind, GeneratorParams, ScenarioConfig};

const PRESETS: [(&str, &str); 8] = [
    ("sea", include_str!("../configs/sea.toml")),
    ("tree", include_str!("../configs/tree.toml")),
    ("rbf", include_str!("../configs/rbf.toml")),
    ("hyperplane", include_str!("../configs/hyperplane.toml")),
    ("weather", include_str!("../configs/weather.toml")),
    ("kitti", include_str!("../configs/kitti.toml")),
    ("cnnibn", include_str!("../configs/cnnibn.toml")),
    ("bbc", include_str!("../configs/bbc.toml")),
];

#[derive(Parser)]
#[command(name = "obal", version, about = "Online multistream classification under asynchronous drift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment over one or more seeds and write a CSV report.
    Run(RunArgs),
    /// Vary one parameter and write one summary row per value.
    Sweep(SweepArgs),
    /// Write a generated scenario to a directory of CSV files.
    Generate(GenerateArgs),
    /// Summarize an NDJSON event log.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    HoeffdingTree,
    NaiveBayes,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowTestArg {
    TwoSided,
    OneSided,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment file; its values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a shipped preset (sea, tree, rbf, hyperplane, weather, kitti, cnnibn, bbc).
    #[arg(long)]
    preset: Option<String>,
    /// Synthetic generator.
    #[arg(long)]
    generator: Option<GeneratorKind>,
    /// CSV dataset to split into sources and target by density.
    #[arg(long, conflicts_with = "generator")]
    csv: Option<PathBuf>,
    /// Label column of the CSV dataset (zero-based).
    #[arg(long, requires = "csv")]
    label_column: Option<usize>,
    /// CSV dataset has a header row.
    #[arg(long, requires = "csv")]
    header: bool,
    /// Per-stream sizes for the CSV split: N values, optionally plus the target size.
    #[arg(long, value_delimiter = ',', requires = "csv")]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    n_sources: Option<usize>,
    #[arg(long)]
    samples_per_stream: Option<usize>,
    #[arg(long)]
    variant: Option<Variant>,
    /// Initialization batch size and target window length.
    #[arg(long)]
    l_n: Option<usize>,
    /// Re-weighting iterations.
    #[arg(long)]
    i_max: Option<usize>,
    /// Classifier pool capacity.
    #[arg(long)]
    pool_size: Option<usize>,
    /// Fix the GMM component count instead of selecting it by BIC.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, value_enum)]
    window_test: Option<WindowTestArg>,
    /// Critical value of the target window test.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, value_enum)]
    learner: Option<LearnerArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Seeds: a list and/or ranges, e.g. `0..10`, `0-9`, `1,4,7`.
    #[arg(long, required = true)]
    seed: String,
    /// Report CSV path.
    #[arg(long, required = true)]
    out: PathBuf,
    /// NDJSON event log path; one file per seed when several seeds run.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Include one `prediction` event per target instance in the log.
    #[arg(long, requires = "events")]
    log_predictions: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Parameter to vary: l_n, i_max or pool_size.
    #[arg(long)]
    param: SweepParameter,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<usize>,
    #[arg(long)]
    seed: Option<String>,
    /// Sweep CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    generator: GeneratorKind,
    #[arg(long, default_value_t = 3)]
    n_sources: usize,
    #[arg(long, default_value_t = 25_000)]
    samples_per_stream: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scenario TOML file; overrides the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// NDJSON event log.
    events: PathBuf,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Generate(args) => generate(args),
        Command::Inspect(args) => inspect(args),
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
            seeds.extend(a..b);
        } else if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
            seeds.extend(a..=b);
        } else {
            seeds.push(part.parse().with_context(|| format!("invalid seed '{part}'"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

/// Recursively overlays `top` onto `base`.
fn merge(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(existing) if existing.is_table() && v.is_table() => merge(existing, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn build_config(args: &ExperimentArgs, seeds: Option<Vec<u64>>) -> Result<ExperimentConfig> {
    let mut config = match &args.preset {
        Some(name) => {
            let (_, text) = PRESETS
                .iter()
                .find(|(n, _)| n.eq_ignore_ascii_case(name))
                .with_context(|| format!("unknown preset '{name}'"))?;
            ExperimentConfig::from_toml(text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(kind) = args.generator {
        let defaults = ExperimentConfig::default();
        let (n, sps) = match &config.dataset {
            Dataset::Synthetic {
                n_sources,
                samples_per_stream,
                ..
            } => (*n_sources, *samples_per_stream),
            _ => match defaults.dataset {
                Dataset::Synthetic {
                    n_sources,
                    samples_per_stream,
                    ..
                } => (n_sources, samples_per_stream),
                _ => unreachable!("default dataset is synthetic"),
            },
        };
        config.dataset = Dataset::Synthetic {
            generator: kind,
            n_sources: n,
            samples_per_stream: sps,
            change_points: None,
            params: GeneratorParams::default(),
        };
    }
    if let Some(path) = &args.csv {
        let n_sources = args.n_sources.unwrap_or(3);
        config.dataset = Dataset::Csv {
            path: path.clone(),
            schema: CsvSchema {
                has_header: args.header,
                feature_columns: None,
                label_column: args.label_column,
                class_map: None,
            },
            n_sources,
            sizes: args.sizes.clone().context("--csv needs --sizes")?,
        };
    }
    match &mut config.dataset {
        Dataset::Synthetic {
            n_sources,
            samples_per_stream,
            ..
        } => {
            if let Some(n) = args.n_sources {
                *n_sources = n;
            }
            if let Some(s) = args.samples_per_stream {
                *samples_per_stream = s;
            }
        }
        Dataset::Csv { n_sources, .. } => {
            if let Some(n) = args.n_sources {
                *n_sources = n;
            }
        }
        Dataset::CsvStreams { .. } => {}
    }
    if let Some(v) = args.variant {
        config.variant = v;
    }
    let e = &mut config.engine;
    if let Some(v) = args.l_n {
        e.l_n = v;
    }
    if let Some(v) = args.i_max {
        e.i_max = v;
    }
    if let Some(v) = args.pool_size {
        e.pool_size = v;
    }
    if let Some(k) = args.components {
        e.components = ComponentCount::Fixed(k);
    }
    if let Some(w) = args.window_test {
        e.window_test = match w {
            WindowTestArg::TwoSided => WindowTest::TwoSided,
            WindowTestArg::OneSided => WindowTest::OneSided,
        };
    }
    if let Some(z) = args.z {
        e.z = z;
    }
    if let Some(l) = args.learner {
        e.learner = match l {
            LearnerArg::HoeffdingTree => LearnerKind::default(),
            LearnerArg::NaiveBayes => LearnerKind::NaiveBayes,
        };
    }
    if let Some(s) = seeds {
        config.seeds = s;
    }
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: toml::Value = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut merged = toml::Value::try_from(&config)?;
        merge(&mut merged, file);
        config = merged.try_into().with_context(|| format!("invalid config {}", path.display()))?;
    }
    config.validate()?;
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn seed_path(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "events".into(), |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

fn print_report(report: &Report) {
    println!(
        "{} {}: accuracy {:.2} ± {:.2} over {} seeds (excluding stale {:.2}), {:.1}s",
        report.dataset,
        report.variant,
        report.mean_accuracy,
        report.std_over_seeds,
        report.seeds.len(),
        report.mean_accuracy_excluding_stale,
        report.wall_clock_secs
    );
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = build_config(&args.experiment, Some(parse_seeds(&args.seed)?))?;
    config.engine.log_predictions = args.log_predictions;
    let report = run_experiment(&config)?;
    let mut out = create(&args.out)?;
    report.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.events {
        let single = report.seeds.len() == 1;
        for s in &report.seeds {
            let p = if single { path.clone() } else { seed_path(path, s.seed) };
            let mut w = create(&p)?;
            write_event_log(&s.events, &mut w)?;
            w.flush()?;
        }
    }
    print_report(&report);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let seeds = args.seed.as_deref().map(parse_seeds).transpose()?;
    let config = build_config(&args.experiment, seeds)?;
    let rows = parameter_sweep(&config, args.param, &args.values)?;
    let mut out = create(&args.out)?;
    write_sweep_csv(&rows, &mut out)?;
    out.flush()?;
    for r in &rows {
        print!("{} = {}: ", r.parameter, r.value);
        print_report(&r.report);
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let scenario = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<ScenarioConfig>(&text)?
        }
        None => ScenarioConfig::new(args.generator, args.n_sources, args.samples_per_stream, args.seed),
    };
    scenario.validate()?;
    let ms = scenario.build()?;
    fs::create_dir_all(&args.out)?;
    let header = |labeled: bool| {
        let mut h: Vec<String> = (0..ms.dim).map(|j| format!("f{j}")).collect();
        if labeled {
            h.push("label".into());
        }
        h
    };
    for (i, stream) in ms.sources.iter().enumerate() {
        let mut w = csv::Writer::from_path(args.out.join(format!("source_{i}.csv")))?;
        w.write_record(header(true))?;
        for inst in stream {
            let mut rec: Vec<String> = inst.features.iter().map(|v| v.to_string()).collect();
            rec.push(inst.label.map_or_else(String::new, |y| y.to_string()));
            w.write_record(rec)?;
        }
        w.flush()?;
    }
    let mut w = csv::Writer::from_path(args.out.join("target.csv"))?;
    w.write_record(header(false))?;
    for inst in &ms.target {
        w.write_record(inst.features.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(args.out.join("target_labels.csv"))?;
    w.write_record(["label"])?;
    for y in &ms.held_out {
        w.write_record([y.to_string()])?;
    }
    w.flush()?;
    fs::write(args.out.join("scenario.toml"), toml::to_string(&scenario)?)?;
    println!(
        "wrote {} sources and a target of {} instances to {}",
        ms.n_sources(),
        ms.target.len(),
        args.out.display()
    );
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<()> {
    let file = File::open(&args.events).with_context(|| format!("opening {}", args.events.display()))?;
    let events = read_event_log(BufReader::new(file))?;
    let summary = summarize_events(&events);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print!("{summary}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_syntax() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("2-4,9").unwrap(), vec![2, 3, 4, 9]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn presets_parse() {
        for (name, text) in PRESETS {
            let c = ExperimentConfig::from_toml(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.seeds.len(), 10, "{name}");
        }
    }

    #[test]
    fn file_overrides_flags() {
        let mut base = toml::Value::try_from(ExperimentConfig::default()).unwrap();
        let top: toml::Value = toml::from_str("[engine]\nl_n = 77\n").unwrap();
        merge(&mut base, top);
        let c: ExperimentConfig = base.try_into().unwrap();
        assert_eq!(c.engine.l_n, 77);
        assert_eq!(c.engine.i_max, 3);
    }
}
