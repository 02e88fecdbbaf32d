mod common;

use obal::adacosa::{adacosa_init, ensemble_init_predict, AdaCosaConfig, AlignmentMode, InitResult};
use obal::learners::{Classifier, LearnerKind};
use obal::streams::{DataBatch, GeneratorKind, Instance, ScenarioConfig};

use common::mean;

const L_N: usize = 200;

fn batches(n_sources: usize, seed: u64, flipped: Option<usize>) -> (Vec<DataBatch>, DataBatch) {
    let ms = ScenarioConfig::new(GeneratorKind::Sea, n_sources, 1000, seed).build().unwrap();
    let sources = ms
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rows = s[..L_N]
                .iter()
                .map(|inst| {
                    let y = inst.label.unwrap();
                    let y = if flipped == Some(i) { 1 - y } else { y };
                    Instance::labeled(inst.features.clone(), y, inst.timestamp)
                })
                .collect();
            DataBatch::new(rows, ms.dim, ms.n_classes).unwrap()
        })
        .collect();
    let target = DataBatch::new(
        ms.target[..L_N].iter().map(|t| t.as_instance()).collect(),
        ms.dim,
        ms.n_classes,
    )
    .unwrap();
    (sources, target)
}

fn full() -> AdaCosaConfig {
    AdaCosaConfig {
        i_max: 3,
        alignment: AlignmentMode::Weighted,
        reweighting: true,
        learner: LearnerKind::default(),
    }
}

fn mean_weights(r: &InitResult) -> Vec<f64> {
    r.sources.iter().map(|s| mean(&s.weights)).collect()
}

#[test]
fn source_identical_to_target_keeps_its_weights() {
    let (sources, _) = batches(1, 3, None);
    let target = DataBatch::new(
        sources[0].rows().iter().map(|r| Instance::unlabeled(r.features.clone(), r.timestamp)).collect(),
        3,
        2,
    )
    .unwrap();
    let cfg = AdaCosaConfig { i_max: 1, ..full() };
    let r = adacosa_init(&sources, &target, &cfg).unwrap();
    let unchanged = r.sources[0].weights.iter().filter(|w| **w == 1.0).count();
    assert!(unchanged as f64 >= 0.95 * L_N as f64, "{unchanged} of {L_N} unchanged");
}

#[test]
fn flipping_a_source_lowers_its_weight() {
    for idx in 0..2 {
        let mut lower = 0;
        for seed in 0..10 {
            let (clean_sources, target) = batches(2, seed, None);
            let (dirty_sources, _) = batches(2, seed, Some(idx));
            let clean = mean_weights(&adacosa_init(&clean_sources, &target, &full()).unwrap());
            let dirty = mean_weights(&adacosa_init(&dirty_sources, &target, &full()).unwrap());
            if dirty[idx] < clean[idx] {
                lower += 1;
            }
        }
        assert!(lower >= 9, "source {idx}: lower in {lower}/10 seeds");
    }
}

#[test]
fn flipped_source_is_outvoted_among_three() {
    for idx in 0..3 {
        let mut lowest = 0;
        for seed in 0..10 {
            let (sources, target) = batches(3, seed, Some(idx));
            let w = mean_weights(&adacosa_init(&sources, &target, &full()).unwrap());
            if (0..3).filter(|&j| j != idx).all(|j| w[idx] < w[j]) {
                lowest += 1;
            }
        }
        assert!(lowest >= 9, "flipped source {idx} lowest in {lowest}/10 seeds");
    }
}

#[test]
fn weights_stay_in_unit_interval_and_coefficients_sum_to_one() {
    let (sources, target) = batches(3, 5, None);
    let r = adacosa_init(&sources, &target, &full()).unwrap();
    let beta = r.beta.unwrap();
    for s in &r.sources {
        assert_eq!(s.weights.len(), L_N);
        for w in &s.weights {
            assert!(*w > 0.0 && *w <= 1.0);
            // Every weight is e^{−β·k} for some number of misses k ≤ I_max.
            let k = (-w.ln() / beta).round();
            assert!((0.0..=3.0).contains(&k));
            assert!((w - (-beta * k).exp()).abs() < 1e-12);
        }
    }
    let coef = r.ensemble_coefficients();
    assert!((coef.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(r, adacosa_init(&sources, &target, &full()).unwrap());
}

#[test]
fn without_reweighting_weights_stay_at_one() {
    let (sources, target) = batches(2, 1, None);
    for alignment in [AlignmentMode::Off, AlignmentMode::Plain, AlignmentMode::Weighted] {
        let cfg = AdaCosaConfig {
            reweighting: false,
            alignment,
            ..full()
        };
        let r = adacosa_init(&sources, &target, &cfg).unwrap();
        assert!(r.beta.is_none());
        assert!(r.sources.iter().all(|s| s.weights.iter().all(|w| *w == 1.0)));
        if alignment == AlignmentMode::Off {
            assert!(r.sources.iter().all(|s| s.transform.matrix().is_identity(0.0)));
        }
    }
}

#[test]
fn single_source_ensemble_is_its_target_classifier() {
    let (sources, target) = batches(1, 2, None);
    let r = adacosa_init(&sources, &target, &full()).unwrap();
    for row in target.rows().iter().take(20) {
        let e = ensemble_init_predict(&r, &row.features).unwrap();
        let f = r.sources[0].target_classifier.predict_proba(&row.features).unwrap();
        for (a, b) in e.iter().zip(&f) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn rejects_mismatched_batches() {
    let (mut sources, target) = batches(2, 0, None);
    let cfg = full();
    assert!(adacosa_init(&[], &target, &cfg).is_err());
    sources[1] = DataBatch::new(vec![Instance::labeled(vec![1.0, 2.0], 0, 0); 5], 2, 2).unwrap();
    assert!(adacosa_init(&sources, &target, &cfg).is_err());
    let (sources, _) = batches(2, 0, None);
    assert!(adacosa_init(&sources, &target, &AdaCosaConfig { i_max: 0, ..cfg }).is_err());
}
