//! Drift detectors: DDM on the source error rate and a dual sliding window
//! mean test on the target stream's GMM likelihoods.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{ObalError, Result};

/// Updates before DDM thresholds apply.
pub const DDM_WARM_UP: u64 = 30;
pub const DDM_WARNING_LEVEL: f64 = 2.0;
pub const DDM_DRIFT_LEVEL: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftStatus {
    Stable,
    Warning,
    Drift,
}

/// Drift Detection Method state over a stream of prediction outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdmState {
    count: u64,
    errors: u64,
    p_min: f64,
    s_min: f64,
    status: DriftStatus,
}

impl Default for DdmState {
    fn default() -> Self {
        DdmState {
            count: 0,
            errors: 0,
            p_min: f64::INFINITY,
            s_min: f64::INFINITY,
            status: DriftStatus::Stable,
        }
    }
}

impl DdmState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn error_rate(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.errors as f64 / self.count as f64
        }
    }

    pub fn std(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let p = self.error_rate();
        (p * (1.0 - p) / self.count as f64).sqrt()
    }

    pub fn minima(&self) -> (f64, f64) {
        (self.p_min, self.s_min)
    }

    pub fn status(&self) -> DriftStatus {
        self.status
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Feeds one prediction outcome. On drift the state is reset after the
    /// status is reported.
    pub fn update(&mut self, correct: bool) -> DriftStatus {
        self.count += 1;
        if !correct {
            self.errors += 1;
        }
        if self.count < DDM_WARM_UP {
            self.status = DriftStatus::Stable;
            return self.status;
        }
        let p = self.error_rate();
        let s = self.std();
        if p + s <= self.p_min + self.s_min {
            self.p_min = p;
            self.s_min = s;
        }
        // Strict comparisons: with an error-free warm-up both minima are zero
        // and a non-strict test would fire on a perfect classifier.
        self.status = if p + s > self.p_min + DDM_DRIFT_LEVEL * self.s_min {
            DriftStatus::Drift
        } else if p + s > self.p_min + DDM_WARNING_LEVEL * self.s_min {
            DriftStatus::Warning
        } else {
            DriftStatus::Stable
        };
        if self.status == DriftStatus::Drift {
            self.reset();
            return DriftStatus::Drift;
        }
        self.status
    }
}

pub fn ddm_update(state: &mut DdmState, correct: bool) -> DriftStatus {
    state.update(correct)
}

/// Direction of the target window mean test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowTest {
    /// `|μ_det − μ_ref| > z·σ/√n`
    #[default]
    TwoSided,
    /// `μ_det > μ_ref + z·σ/√n`, firing only on a likelihood increase.
    OneSided,
}

/// Threshold `μ_ref + z·σ/√n` of the window mean test.
pub fn window_threshold(mu_ref: f64, sigma: f64, n: usize, z: f64) -> f64 {
    mu_ref + z * sigma / (n as f64).sqrt()
}

/// Decides the window mean test from summary statistics.
pub fn window_test(mu_ref: f64, mu_det: f64, sigma: f64, n: usize, z: f64, test: WindowTest) -> bool {
    let margin = z * sigma / (n as f64).sqrt();
    match test {
        WindowTest::TwoSided => (mu_det - mu_ref).abs() > margin,
        WindowTest::OneSided => mu_det > mu_ref + margin,
    }
}

/// Summary of the two target windows after an update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub mu_ref: f64,
    pub mu_det: f64,
    pub sigma: f64,
}

/// Reference and detection windows of `n` likelihoods each; `W_det`
/// immediately follows `W_ref` and both slide one step per update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDriftState {
    n: usize,
    z: f64,
    test: WindowTest,
    values: VecDeque<f64>,
    last: Option<WindowStats>,
}

impl TargetDriftState {
    pub fn new(n: usize, z: f64, test: WindowTest) -> Result<Self> {
        if n == 0 {
            return Err(ObalError::InvalidConfig("window size must be positive".into()));
        }
        if !(z.is_finite() && z >= 0.0) {
            return Err(ObalError::InvalidConfig(format!("invalid z value {z}")));
        }
        Ok(TargetDriftState {
            n,
            z,
            test,
            values: VecDeque::with_capacity(2 * n + 1),
            last: None,
        })
    }

    pub fn window_size(&self) -> usize {
        self.n
    }

    pub fn is_warm(&self) -> bool {
        self.values.len() == 2 * self.n
    }

    pub fn reference_window(&self) -> Vec<f64> {
        let split = self.values.len().saturating_sub(self.n);
        self.values.iter().take(split.min(self.n)).cloned().collect()
    }

    pub fn detection_window(&self) -> Vec<f64> {
        let split = self.values.len().saturating_sub(self.n);
        self.values.iter().skip(split).cloned().collect()
    }

    pub fn last_stats(&self) -> Option<WindowStats> {
        self.last
    }

    pub fn reset(&mut self) {
        self.values.clear();
        self.last = None;
    }

    /// Appends one likelihood and tests the windows once both are full.
    pub fn update(&mut self, likelihood: f64) -> Result<bool> {
        if !likelihood.is_finite() {
            return Err(ObalError::NonFinite("target likelihood".into()));
        }
        self.values.push_back(likelihood);
        if self.values.len() > 2 * self.n {
            self.values.pop_front();
        }
        if !self.is_warm() {
            return Ok(false);
        }
        let n = self.n as f64;
        let mu_ref = self.values.iter().take(self.n).sum::<f64>() / n;
        let mu_det = self.values.iter().skip(self.n).sum::<f64>() / n;
        let sigma = if self.n > 1 {
            let ss: f64 = self.values.iter().take(self.n).map(|v| (v - mu_ref).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        self.last = Some(WindowStats { mu_ref, mu_det, sigma });
        Ok(window_test(mu_ref, mu_det, sigma, self.n, self.z, self.test))
    }
}
