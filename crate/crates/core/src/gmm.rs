//! Gaussian mixture models fit by Expectation-Maximization.
//!
//! The M-step maximizes the expected complete-data log-likelihood over
//! covariances with every eigenvalue at least `ε` (the regularization
//! floor): the weighted sample covariance with its eigenvalues raised to `ε`.
//! Each EM step therefore keeps the floor and never lowers the
//! log-likelihood, which [`FitDiagnostics::trace`] records.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ObalError, Result};
use crate::streams::DataBatch;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub reg_floor: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iters: 200,
            tol: 1e-6,
            reg_floor: 1e-6,
            seed: 0,
        }
    }
}

/// How many mixture components to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentCount {
    Fixed(usize),
    /// Pick `K ∈ 1..=max` by minimum BIC.
    Bic { max: usize },
}

impl Default for ComponentCount {
    fn default() -> Self {
        ComponentCount::Bic { max: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major `d × d`.
    pub covariance: Vec<f64>,
    precision: Vec<f64>,
    log_det: f64,
}

impl GmmComponent {
    fn new(weight: f64, mean: Vec<f64>, covariance: &DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| ObalError::NonFinite("covariance is not positive definite".into()))?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let precision = chol.inverse();
        Ok(GmmComponent {
            weight,
            mean,
            covariance: (0..d * d).map(|i| covariance[(i / d, i % d)]).collect(),
            precision: (0..d * d).map(|i| precision[(i / d, i % d)]).collect(),
            log_det,
        })
    }

    fn covariance_matrix(&self) -> DMatrix<f64> {
        let d = self.mean.len();
        DMatrix::from_row_slice(d, d, &self.covariance)
    }

    fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let mut acc = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.precision[i * d + j] * diff[j];
            }
            acc += diff[i] * row;
        }
        acc
    }

    /// Log Gaussian density `log N(x; μ_k, Σ_k)`.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.mean.len() as f64;
        -0.5 * (d * LN_2PI + self.log_det + self.mahalanobis_sq(x))
    }

    /// Smallest covariance eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = self.covariance_matrix().symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Final (unpenalized) log-likelihood of the batch.
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Log-likelihood after initialization and after every EM step.
    pub trace: Vec<f64>,
    /// True when a degenerate batch forced a single component.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    dim: usize,
    components: Vec<GmmComponent>,
    diagnostics: FitDiagnostics,
}

impl GmmModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(ObalError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn live(&self) -> impl Iterator<Item = &GmmComponent> {
        self.components.iter().filter(|c| c.weight > 0.0)
    }

    /// `log P(x) = log Σ_k w_k N(x; μ_k, Σ_k)`.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let terms: Vec<f64> = self.live().map(|c| c.weight.ln() + c.log_density(x)).collect();
        Ok(log_sum_exp(&terms))
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// `max_k log N(x; μ_k, Σ_k)`, not weighted by `w_k`.
    pub fn max_component_log_likelihood(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self
            .live()
            .map(|c| c.log_density(x))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `max_k N(x; μ_k, Σ_k)`. Clamped below at the smallest positive normal
    /// `f64` so far-away points still get a positive value.
    pub fn max_component_likelihood(&self, x: &[f64]) -> Result<f64> {
        Ok(self.max_component_log_likelihood(x)?.exp().max(f64::MIN_POSITIVE))
    }

    /// The winning component's density at `x` divided by its density at its
    /// own mean, `exp(−½ · mahalanobis²)`, in `(0, 1]`.
    pub fn normalized_max_likelihood(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let winner = self
            .live()
            .max_by(|a, b| a.log_density(x).total_cmp(&b.log_density(x)))
            .ok_or(ObalError::Untrained)?;
        Ok((-0.5 * winner.mahalanobis_sq(x)).exp().max(f64::MIN_POSITIVE))
    }

    pub fn log_likelihood(&self, rows: &[&[f64]]) -> f64 {
        rows.iter().map(|r| self.log_pdf(r).unwrap_or(f64::NEG_INFINITY)).sum()
    }

    /// Bayesian information criterion of the model on `rows`.
    pub fn bic(&self, rows: &[&[f64]]) -> f64 {
        let k = self.k() as f64;
        let d = self.dim as f64;
        let params = (k - 1.0) + k * d + k * d * (d + 1.0) / 2.0;
        -2.0 * self.log_likelihood(rows) + params * (rows.len() as f64).ln()
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn fit_gmm(batch: &DataBatch, k: usize, config: &EmConfig) -> Result<GmmModel> {
    fit_gmm_rows(&batch.features(), batch.dim(), k, config)
}

/// Fits with a fixed or BIC-selected component count.
pub fn fit_gmm_with(
    rows: &[&[f64]],
    dim: usize,
    count: ComponentCount,
    config: &EmConfig,
) -> Result<GmmModel> {
    match count {
        ComponentCount::Fixed(k) => fit_gmm_rows(rows, dim, k, config),
        ComponentCount::Bic { max } => {
            let max = max.max(1).min(rows.len());
            let mut best: Option<(f64, GmmModel)> = None;
            for k in 1..=max {
                let model = fit_gmm_rows(rows, dim, k, config)?;
                if model.diagnostics.fallback {
                    break;
                }
                let bic = model.bic(rows);
                if best.as_ref().is_none_or(|(b, _)| bic < *b) {
                    best = Some((bic, model));
                }
            }
            match best {
                Some((_, model)) => Ok(model),
                None => fit_gmm_rows(rows, dim, 1, config),
            }
        }
    }
}

pub fn fit_gmm_rows(rows: &[&[f64]], dim: usize, k: usize, config: &EmConfig) -> Result<GmmModel> {
    let n = rows.len();
    if k == 0 {
        return Err(ObalError::InvalidConfig("K must be at least 1".into()));
    }
    if k > n {
        return Err(ObalError::TooManyComponents { k, rows: n });
    }
    if !(config.reg_floor > 0.0) {
        return Err(ObalError::InvalidConfig("reg_floor must be positive".into()));
    }
    let data = DMatrix::from_fn(n, dim, |i, j| rows[i][j]);
    for row in rows {
        if row.len() != dim {
            return Err(ObalError::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ObalError::NonFinite("GMM input".into()));
        }
    }

    let all_identical = rows.iter().all(|r| *r == rows[0]);
    if k > 1 && all_identical {
        log::warn!("degenerate batch: all {n} rows identical, fitting a single component");
        let mut model = fit_single(&data, config)?;
        model.diagnostics.fallback = true;
        return Ok(model);
    }
    if k == 1 {
        return fit_single(&data, config);
    }

    let floor = config.reg_floor;
    let (_, global_scatter) = weighted_scatter(&data, None);
    let init_cov = floor_eigenvalues(global_scatter / n as f64, floor);
    let seeds = kmeans_pp(&data, k, config.seed);
    let mut components = seeds
        .iter()
        .map(|&i| GmmComponent::new(1.0 / k as f64, data.row(i).iter().cloned().collect(), &init_cov))
        .collect::<Result<Vec<_>>>()?;

    let mut trace = Vec::new();
    let mut resp = DMatrix::<f64>::zeros(n, k);
    let mut iterations = 0;
    let mut objective = e_step(&data, &components, &mut resp);
    trace.push(objective);
    while iterations < config.max_iters {
        components = m_step(&data, &resp, &components, floor)?;
        iterations += 1;
        let next = e_step(&data, &components, &mut resp);
        debug_assert!(
            next >= objective - 1e-9 * (1.0 + objective.abs()),
            "EM lowered the log-likelihood from {objective} to {next}"
        );
        trace.push(next);
        let improvement = next - objective;
        objective = next;
        if improvement.abs() < config.tol * (1.0 + objective.abs()) {
            break;
        }
    }

    let log_likelihood = objective;
    Ok(GmmModel {
        dim,
        components,
        diagnostics: FitDiagnostics {
            log_likelihood,
            iterations,
            trace,
            fallback: false,
        },
    })
}

fn fit_single(data: &DMatrix<f64>, config: &EmConfig) -> Result<GmmModel> {
    let (n, dim) = data.shape();
    let (mean, scatter) = weighted_scatter(data, None);
    let cov = floor_eigenvalues(scatter / n as f64, config.reg_floor);
    let comp = GmmComponent::new(1.0, mean.iter().cloned().collect(), &cov)?;
    let ll: f64 = data
        .row_iter()
        .map(|r| comp.log_density(&r.iter().cloned().collect::<Vec<_>>()))
        .sum();
    Ok(GmmModel {
        dim,
        components: vec![comp],
        diagnostics: FitDiagnostics {
            log_likelihood: ll,
            iterations: 0,
            trace: vec![ll],
            fallback: false,
        },
    })
}

/// Weighted mean and scatter matrix `Σ r_i (x_i − μ)(x_i − μ)ᵀ`.
fn weighted_scatter(data: &DMatrix<f64>, weights: Option<&[f64]>) -> (DVector<f64>, DMatrix<f64>) {
    let (n, dim) = data.shape();
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..n).map(w).sum();
    let mut mean = DVector::<f64>::zeros(dim);
    for i in 0..n {
        mean += data.row(i).transpose() * w(i);
    }
    mean /= total;
    let mut scatter = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        let diff = data.row(i).transpose() - &mean;
        scatter += &diff * diff.transpose() * w(i);
    }
    (mean, scatter)
}

/// Raises every eigenvalue of a symmetric matrix to at least `floor`.
fn floor_eigenvalues(cov: DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = (&cov + cov.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let clamped = eig.eigenvalues.map(|v| v.max(floor));
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    (&out + out.transpose()) * 0.5
}

/// Fills responsibilities and returns the log-likelihood of `data`.
fn e_step(data: &DMatrix<f64>, components: &[GmmComponent], resp: &mut DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    let mut logs = vec![0.0; components.len()];
    for (i, row) in data.row_iter().enumerate() {
        let x: Vec<f64> = row.iter().cloned().collect();
        for (k, c) in components.iter().enumerate() {
            logs[k] = if c.weight > 0.0 {
                c.weight.ln() + c.log_density(&x)
            } else {
                f64::NEG_INFINITY
            };
        }
        let lse = log_sum_exp(&logs);
        total += lse;
        for k in 0..components.len() {
            resp[(i, k)] = (logs[k] - lse).exp();
        }
    }
    total
}

fn m_step(
    data: &DMatrix<f64>,
    resp: &DMatrix<f64>,
    previous: &[GmmComponent],
    floor: f64,
) -> Result<Vec<GmmComponent>> {
    let n = data.nrows();
    previous
        .iter()
        .enumerate()
        .map(|(k, old)| {
            let r: Vec<f64> = resp.column(k).iter().cloned().collect();
            let nk: f64 = r.iter().sum();
            if nk <= 1e-300 {
                let mut dead = old.clone();
                dead.weight = 0.0;
                return Ok(dead);
            }
            let (mean, scatter) = weighted_scatter(data, Some(&r));
            let cov = floor_eigenvalues(scatter / nk, floor);
            GmmComponent::new(nk / n as f64, mean.iter().cloned().collect(), &cov)
        })
        .collect()
}

/// k-means++ seeding; returns row indices.
fn kmeans_pp(data: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let n = data.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut dist: Vec<f64> = (0..n)
        .map(|i| (data.row(i) - data.row(chosen[0])).norm_squared())
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in dist.iter().enumerate() {
                if u < *d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min((data.row(i) - data.row(next)).norm_squared());
        }
    }
    chosen
}
