use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use obal::gmm::{fit_gmm_rows, fit_gmm_with, ComponentCount, EmConfig};
use obal::ObalError;

fn blobs(seed: u64, centers: &[[f64; 2]], per: usize, spread: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..per {
        for c in centers {
            out.push(c.iter().map(|m| m + spread * rng.sample::<f64, _>(StandardNormal)).collect());
        }
    }
    out
}

fn refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
    rows.iter().map(Vec::as_slice).collect()
}

#[test]
fn single_component_is_the_regularized_mle() {
    let data = blobs(1, &[[1.0, -2.0]], 80, 1.5);
    let cfg = EmConfig::default();
    let m = fit_gmm_rows(&refs(&data), 2, 1, &cfg).unwrap();
    let n = data.len() as f64;
    let mean: Vec<f64> = (0..2).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let c = &m.components()[0];
    for j in 0..2 {
        assert!((c.mean[j] - mean[j]).abs() < 1e-12);
    }
    for a in 0..2 {
        for b in 0..2 {
            let s = data.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / n;
            assert!((c.covariance[a * 2 + b] - s).abs() < 1e-12);
        }
    }
    assert_eq!(m.diagnostics().iterations, 0);
    assert_eq!(c.weight, 1.0);
}

#[test]
fn floor_lifts_only_small_eigenvalues() {
    // Points on a line: the sample covariance is singular along (1, -1).
    let data: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 0.1, i as f64 * 0.1]).collect();
    let cfg = EmConfig { reg_floor: 1e-3, ..EmConfig::default() };
    let m = fit_gmm_rows(&refs(&data), 2, 1, &cfg).unwrap();
    let c = &m.components()[0];
    let n = data.len() as f64;
    let mean = data.iter().map(|r| r[0]).sum::<f64>() / n;
    let var = data.iter().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / n;
    // Eigenvalues: 2·var along (1, 1) and the floor along (1, −1).
    let expected = [var + 5e-4, var - 5e-4, var - 5e-4, var + 5e-4];
    for (got, want) in c.covariance.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    assert!((c.min_eigenvalue() - 1e-3).abs() < 1e-12);
}

#[test]
fn recovers_separated_clusters_and_bic_picks_two() {
    let centers = [[-5.0, 0.0], [5.0, 3.0]];
    let data = blobs(2, &centers, 150, 1.0);
    let m = fit_gmm_with(&refs(&data), 2, ComponentCount::Bic { max: 5 }, &EmConfig::default()).unwrap();
    assert_eq!(m.k(), 2);
    for c in &centers {
        let nearest = m
            .components()
            .iter()
            .map(|comp| ((comp.mean[0] - c[0]).powi(2) + (comp.mean[1] - c[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 0.3, "center {c:?} missed by {nearest}");
    }
    for comp in m.components() {
        assert!((comp.weight - 0.5).abs() < 0.02);
    }
}

#[test]
fn log_likelihood_never_decreases() {
    for seed in 0..10 {
        let data = blobs(seed, &[[0.0, 0.0], [1.5, 0.5], [-1.0, 2.0]], 25, 1.0);
        let cfg = EmConfig { seed, tol: 0.0, max_iters: 80, ..EmConfig::default() };
        let m = fit_gmm_rows(&refs(&data), 2, 4, &cfg).unwrap();
        let trace = &m.diagnostics().trace;
        assert_eq!(trace.len(), 81);
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: {} -> {}", w[0], w[1]);
        }
        assert!((m.diagnostics().log_likelihood - m.log_likelihood(&refs(&data))).abs() < 1e-9);
    }
}

#[test]
fn density_integrates_to_one() {
    let data = blobs(3, &[[0.0, 0.0], [4.0, 0.0]], 60, 0.8);
    let one_d: Vec<Vec<f64>> = data.iter().map(|r| vec![r[0]]).collect();
    let m = fit_gmm_rows(&refs(&one_d), 1, 2, &EmConfig::default()).unwrap();
    let h = 1e-3;
    let integral: f64 = (0..20_000).map(|i| m.pdf(&[-8.0 + (i as f64 + 0.5) * h]).unwrap() * h).sum();
    assert!((integral - 1.0).abs() < 1e-6, "{integral}");
}

#[test]
fn likelihood_views_are_consistent() {
    let data = blobs(4, &[[0.0, 0.0], [6.0, 6.0]], 100, 1.0);
    let m = fit_gmm_rows(&refs(&data), 2, 2, &EmConfig::default()).unwrap();
    for c in m.components() {
        let at_mean = m.normalized_max_likelihood(&c.mean).unwrap();
        assert!((at_mean - 1.0).abs() < 1e-12);
        let direct = c.log_density(&c.mean);
        assert!(m.max_component_log_likelihood(&c.mean).unwrap() >= direct - 1e-12);
    }
    let far = [1e6, -1e6];
    assert_eq!(m.max_component_likelihood(&far).unwrap(), f64::MIN_POSITIVE);
    assert!(m.normalized_max_likelihood(&far).unwrap() > 0.0);
    assert!(matches!(m.pdf(&[1.0]), Err(ObalError::DimensionMismatch { .. })));
}

#[test]
fn degenerate_batch_falls_back_to_one_component() {
    let data = vec![vec![2.0, 2.0]; 30];
    let m = fit_gmm_rows(&refs(&data), 2, 3, &EmConfig::default()).unwrap();
    assert_eq!(m.k(), 1);
    assert!(m.diagnostics().fallback);
    assert!(m.components()[0].min_eigenvalue() >= EmConfig::default().reg_floor * (1.0 - 1e-9));
    assert!(m.max_component_likelihood(&[2.0, 2.0]).unwrap().is_finite());
}

#[test]
fn invalid_requests_are_rejected() {
    let data = blobs(5, &[[0.0, 0.0]], 3, 1.0);
    let cfg = EmConfig::default();
    assert!(matches!(
        fit_gmm_rows(&refs(&data), 2, 4, &cfg),
        Err(ObalError::TooManyComponents { .. })
    ));
    assert!(fit_gmm_rows(&refs(&data), 2, 0, &cfg).is_err());
    let bad = vec![vec![0.0, f64::NAN], vec![1.0, 1.0]];
    assert!(fit_gmm_rows(&refs(&bad), 2, 1, &cfg).is_err());
}

#[test]
fn fixed_seed_is_reproducible() {
    let data = blobs(6, &[[0.0, 0.0], [3.0, 1.0], [-2.0, 4.0]], 50, 1.0);
    let cfg = EmConfig { seed: 17, ..EmConfig::default() };
    let a = fit_gmm_rows(&refs(&data), 2, 3, &cfg).unwrap();
    let b = fit_gmm_rows(&refs(&data), 2, 3, &cfg).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn fitted_models_respect_invariants(seed in 0u64..1000, k in 1usize..5) {
        let data = blobs(seed, &[[0.0, 0.0], [2.0, 2.0], [-3.0, 1.0]], 20, 1.0);
        let cfg = EmConfig { seed, ..EmConfig::default() };
        let m = fit_gmm_rows(&refs(&data), 2, k, &cfg).unwrap();
        let total: f64 = m.components().iter().map(|c| c.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for c in m.components() {
            prop_assert!((0.0..=1.0).contains(&c.weight));
            prop_assert!(c.min_eigenvalue() >= cfg.reg_floor * (1.0 - 1e-6));
        }
        for w in m.diagnostics().trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "objective fell from {} to {}", w[0], w[1]);
        }
    }
}
