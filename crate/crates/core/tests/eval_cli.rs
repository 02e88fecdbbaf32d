use std::fs;
use std::path::Path;
use std::process::Command;

use obal::engine::{Event, EventKind};
use obal::eval::{
    prequential_accuracy, read_event_log, run_experiment, summarize_events, write_event_log, Dataset,
    ExperimentConfig, Variant, REPORT_COLUMNS, TRAJECTORY_WINDOW,
};
use obal::streams::{GeneratorKind, GeneratorParams};
use obal::ObalError;

fn obal() -> Command {
    Command::new(env!("CARGO_BIN_EXE_obal"))
}

fn small(generator: GeneratorKind, seeds: Vec<u64>) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        dataset: Dataset::Synthetic {
            generator,
            n_sources: 2,
            samples_per_stream: 1500,
            change_points: None,
            params: GeneratorParams::default(),
        },
        seeds,
        ..ExperimentConfig::default()
    };
    c.engine.l_n = 100;
    c
}

#[test]
fn accuracy_counts_matches_and_windows() {
    assert_eq!(prequential_accuracy(&[1, 0, 1, 1], &[1, 1, 1, 0]).unwrap().overall, 50.0);
    let n = 2 * TRAJECTORY_WINDOW + 10;
    let preds: Vec<usize> = (0..n).map(|i| usize::from(i < TRAJECTORY_WINDOW)).collect();
    let labels = vec![1; n];
    let acc = prequential_accuracy(&preds, &labels).unwrap();
    assert_eq!(acc.trajectory, vec![100.0, 0.0, 0.0]);
    let expected = 100.0 * TRAJECTORY_WINDOW as f64 / n as f64;
    assert!((acc.overall - expected).abs() < 1e-12);
    assert!(matches!(
        prequential_accuracy(&[1], &[1, 0]),
        Err(ObalError::LengthMismatch { left: 1, right: 2 })
    ));
    assert_eq!(prequential_accuracy(&[], &[]).unwrap().overall, 0.0);
}

#[test]
fn report_has_one_row_per_seed_plus_summary() {
    let report = run_experiment(&small(GeneratorKind::Sea, vec![0, 1])).unwrap();
    let text = report.to_csv_string().unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, REPORT_COLUMNS);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let names: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(names, ["seed_0", "seed_1", "mean", "std"]);
    let acc: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!((acc[2] - (acc[0] + acc[1]) / 2.0).abs() < 1e-5);
    let sample_std = (acc[0] - acc[1]).abs() / 2f64.sqrt();
    assert!((acc[3] - sample_std).abs() < 1e-5);
    for s in &report.seeds {
        assert_eq!(s.predictions, s.predicted.iter().filter(|p| p.is_some()).count());
        assert!((0.0..=100.0).contains(&s.accuracy));
    }
}

#[test]
fn variants_and_configs_parse() {
    for (text, v) in [("v1", Variant::V1), ("v2", Variant::V2), ("v3", Variant::V3), ("full", Variant::Full)] {
        assert_eq!(text.parse::<Variant>().unwrap(), v);
        assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
    }
    assert!("v9".parse::<Variant>().is_err());
    let cfg = ExperimentConfig::from_toml(
        "variant = \"v3\"\nseeds = [3]\n[engine]\nl_n = 70\n[dataset]\ntype = \"synthetic\"\ngenerator = \"hyperplane\"\nn_sources = 2\nsamples_per_stream = 500\n",
    )
    .unwrap();
    assert_eq!(cfg.variant, Variant::V3);
    assert_eq!(cfg.engine.l_n, 70);
    assert_eq!(cfg.dataset.name(), GeneratorKind::Hyperplane.to_string());
    assert!(ExperimentConfig { seeds: vec![], ..cfg }.validate().is_err());
}

#[test]
fn event_log_round_trips() {
    let report = run_experiment(&small(GeneratorKind::Sea, vec![2])).unwrap();
    let events: &[Event] = &report.seeds[0].events;
    assert!(events.iter().any(|e| e.event == EventKind::Reinit));
    let mut buf = Vec::new();
    write_event_log(events, &mut buf).unwrap();
    assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), events.len());
    let back = read_event_log(buf.as_slice()).unwrap();
    assert_eq!(back, events);
    let summary = summarize_events(&back);
    assert_eq!(summary.total, events.len());
    let reinits = summary.counts["target"]["reinit"];
    assert_eq!(reinits as u64, report.seeds[0].counters.reinits);
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn cli_run_writes_report_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let events = dir.path().join("e.ndjson");
    let args = [
        "run", "--generator", "sea", "--n-sources", "2", "--samples-per-stream", "800", "--l-n", "80", "--seed",
        "0..2",
    ];
    run_ok(obal().args(args).arg("--out").arg(&out).arg("--events").arg(&events));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 + 2);
    assert!(text.starts_with(&REPORT_COLUMNS.join(",")));
    for seed in 0..2 {
        let path = dir.path().join(format!("e.seed{seed}.ndjson"));
        let log = read_event_log(fs::read(&path).unwrap().as_slice()).unwrap();
        assert!(!log.is_empty());
        let shown = run_ok(obal().arg("inspect").arg(&path));
        assert!(shown.contains("target:"), "{shown}");
    }

    let again = dir.path().join("r2.csv");
    run_ok(obal().args(args).arg("--out").arg(&again));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn cli_requires_seed_and_output() {
    let no_seed = obal().args(["run", "--generator", "sea", "--out", "x.csv"]).output().unwrap();
    assert!(!no_seed.status.success());
    assert!(String::from_utf8_lossy(&no_seed.stderr).contains("--seed"));
    let no_out = obal().args(["run", "--generator", "sea", "--seed", "0"]).output().unwrap();
    assert!(!no_out.status.success());
    assert!(String::from_utf8_lossy(&no_out.stderr).contains("--out"));
}

#[test]
fn cli_config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "variant = \"v1\"\n[dataset]\nsamples_per_stream = 600\n").unwrap();
    let out = dir.path().join("r.csv");
    run_ok(
        obal()
            .args(["run", "--generator", "sea", "--n-sources", "2", "--samples-per-stream", "5000"])
            .args(["--variant", "full", "--l-n", "60", "--seed", "4", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out),
    );
    let text = fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(&row[2], "v1");
    assert_eq!(row[5].parse::<usize>().unwrap(), 600 - 60);
    assert_eq!(&row[7], "0");
}

#[test]
fn cli_generated_files_replay_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    run_ok(obal().args(["generate", "--generator", "sea", "--n-sources", "2", "--samples-per-stream", "500"]).arg("--out").arg(&data));
    for f in ["source_0.csv", "source_1.csv", "target.csv", "target_labels.csv", "scenario.toml"] {
        assert!(Path::new(&data).join(f).exists(), "{f} missing");
    }
    let target = fs::read_to_string(data.join("target.csv")).unwrap();
    assert_eq!(target.lines().next().unwrap(), "f0,f1,f2");
    assert_eq!(target.lines().count(), 501);
    assert_eq!(fs::read_to_string(data.join("target_labels.csv")).unwrap().lines().count(), 501);

    let labels = fs::read_to_string(data.join("target_labels.csv")).unwrap();
    let joined: String = target
        .lines()
        .zip(labels.lines())
        .map(|(x, y)| format!("{x},{y}\n"))
        .collect();
    fs::write(data.join("target_labeled.csv"), joined).unwrap();
    let cfg = format!(
        "[dataset]\ntype = \"csv_streams\"\nsources = [{:?}, {:?}]\ntarget = {:?}\n[dataset.schema]\nhas_header = true\nlabel_column = 3\n",
        data.join("source_0.csv"),
        data.join("source_1.csv"),
        data.join("target_labeled.csv")
    );
    fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let from_files = dir.path().join("files.csv");
    let direct = dir.path().join("direct.csv");
    let common = ["run", "--l-n", "60", "--seed", "0"];
    run_ok(obal().args(common).arg("--config").arg(dir.path().join("c.toml")).arg("--out").arg(&from_files));
    run_ok(
        obal()
            .args(common)
            .args(["--generator", "sea", "--n-sources", "2", "--samples-per-stream", "500", "--out"])
            .arg(&direct),
    );
    let accuracy = |p: &Path| -> String {
        let text = fs::read_to_string(p).unwrap();
        let row = csv::Reader::from_reader(text.as_bytes()).records().next().unwrap().unwrap();
        row[3].to_string()
    };
    assert_eq!(accuracy(&from_files), accuracy(&direct));
}

#[test]
fn cli_sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    run_ok(
        obal()
            .args(["sweep", "--generator", "sea", "--n-sources", "2", "--samples-per-stream", "600"])
            .args(["--param", "pool_size", "--values", "1,3", "--seed", "0", "--out"])
            .arg(&out),
    );
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("pool_size,1,") && lines[2].starts_with("pool_size,3,"));
}
