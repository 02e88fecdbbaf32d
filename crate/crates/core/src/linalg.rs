//! Regularized covariance estimation and the closed-form covariance
//! alignment transform.
//!
//! A source batch is whitened with the pseudo-inverse square root of its
//! covariance and re-colored with the square root of the leading `r`
//! eigenpairs of the target covariance, where `r` is the smaller of the two
//! numerical ranks. For full-rank inputs the aligned covariance `Aᵀ C_S A`
//! reproduces `C_T` exactly; for a rank-deficient pair it reproduces the best
//! rank-`r` approximation of `C_T`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ObalError, Result};
use crate::streams::DataBatch;

/// Eigenvalues below this fraction of the largest eigenvalue count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Maximum tolerated asymmetry (absolute, entry-wise) for covariance inputs.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Symmetric real `d × d` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix(DMatrix<f64>);

impl CovMatrix {
    /// Wraps a square matrix, rejecting inputs that are not symmetric.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(ObalError::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(ObalError::NonFinite("covariance entry".into()));
        }
        let asym = max_asymmetry(&matrix);
        if asym > SYMMETRY_TOLERANCE * (1.0 + matrix.amax()) {
            return Err(ObalError::NotSymmetric(asym));
        }
        Ok(CovMatrix(symmetrize(matrix)))
    }

    pub fn from_row_slice(d: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d * d {
            return Err(ObalError::DimensionMismatch {
                expected: d * d,
                actual: values.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(d, d, values))
    }

    pub fn identity(d: usize) -> Self {
        CovMatrix(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Numerical rank under [`RANK_TOLERANCE`].
    pub fn rank(&self) -> usize {
        let eig = SymmetricEigen::new(self.0.clone());
        numerical_rank(&eig.eigenvalues)
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn numerical_rank(eigenvalues: &DVector<f64>) -> usize {
    let largest = eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if largest <= 0.0 {
        return 0;
    }
    eigenvalues
        .iter()
        .filter(|&&v| v > RANK_TOLERANCE * largest)
        .count()
}

/// Sample covariance (denominator `n − 1`) of the row-scaled batch, plus the
/// identity.
///
/// Each row is multiplied by its weight *before* the covariance is taken, so
/// halving every weight quarters the data covariance rather than leaving it
/// unchanged.
pub fn regularized_covariance(batch: &DataBatch, weights: Option<&[f64]>) -> Result<CovMatrix> {
    let rows: Vec<&[f64]> = batch.rows().iter().map(|r| r.features.as_slice()).collect();
    covariance_of_rows(&rows, batch.dim(), weights)
}

/// Same as [`regularized_covariance`] on borrowed feature rows.
pub fn covariance_of_rows(
    rows: &[&[f64]],
    dim: usize,
    weights: Option<&[f64]>,
) -> Result<CovMatrix> {
    let n = rows.len();
    if n < 2 {
        return Err(ObalError::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(ObalError::DimensionMismatch {
                expected: n,
                actual: w.len(),
            });
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ObalError::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(ObalError::InvalidWeights("all weights are zero".into()));
        }
    }
    let mut data = DMatrix::<f64>::zeros(n, dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(ObalError::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        let scale = weights.map_or(1.0, |w| w[i]);
        for (j, v) in row.iter().enumerate() {
            data[(i, j)] = scale * v;
        }
    }
    let mean = data.row_mean();
    for mut row in data.row_iter_mut() {
        row -= &mean;
    }
    let cov = data.transpose() * &data / (n as f64 - 1.0) + DMatrix::identity(dim, dim);
    Ok(CovMatrix(symmetrize(cov)))
}

/// Linear map that aligns a source covariance with a target covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentTransform {
    matrix: DMatrix<f64>,
    rank: usize,
    /// Traces of the covariances the transform was fit on.
    source_trace: f64,
    target_trace: f64,
}

impl AlignmentTransform {
    pub fn identity(d: usize) -> Self {
        AlignmentTransform {
            matrix: DMatrix::identity(d, d),
            rank: d,
            source_trace: d as f64,
            target_trace: d as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn fingerprint(&self) -> (f64, f64) {
        (self.source_trace, self.target_trace)
    }

    /// `x ↦ weight · x · A` for a single feature row.
    pub fn apply_row(&self, features: &[f64], weight: f64) -> Result<Vec<f64>> {
        let d = self.dim();
        if features.len() != d {
            return Err(ObalError::DimensionMismatch {
                expected: d,
                actual: features.len(),
            });
        }
        let mut out = vec![0.0; d];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, x) in features.iter().enumerate() {
                acc += x * self.matrix[(k, j)];
            }
            *o = weight * acc;
        }
        Ok(out)
    }
}

/// Closed-form minimizer of `‖Aᵀ C_S A − C_T‖_F²`.
pub fn coral_transform(source: &CovMatrix, target: &CovMatrix) -> Result<AlignmentTransform> {
    let d = source.dim();
    if target.dim() != d {
        return Err(ObalError::DimensionMismatch {
            expected: d,
            actual: target.dim(),
        });
    }
    let src = SymmetricEigen::new(source.0.clone());
    let tgt = SymmetricEigen::new(target.0.clone());
    let rank = numerical_rank(&src.eigenvalues).min(numerical_rank(&tgt.eigenvalues));

    // U_S Σ_S^{+1/2} U_Sᵀ
    let src_max = src.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let inv_sqrt = src.eigenvalues.map(|v| {
        if src_max > 0.0 && v > RANK_TOLERANCE * src_max {
            1.0 / v.sqrt()
        } else {
            0.0
        }
    });
    let whiten = &src.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * src.eigenvectors.transpose();

    // U_T[1:r] Σ_T[1:r]^{1/2} U_T[1:r]ᵀ
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| tgt.eigenvalues[b].total_cmp(&tgt.eigenvalues[a]));
    let mut recolor = DMatrix::<f64>::zeros(d, d);
    for &idx in order.iter().take(rank) {
        let u = tgt.eigenvectors.column(idx);
        recolor += tgt.eigenvalues[idx].max(0.0).sqrt() * &u * u.transpose();
    }

    let matrix = whiten * recolor;
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(ObalError::NonFinite("alignment transform".into()));
    }
    Ok(AlignmentTransform {
        matrix,
        rank,
        source_trace: source.0.trace(),
        target_trace: target.0.trace(),
    })
}

/// Scales each row by its weight and right-multiplies by `A`. Labels and
/// timestamps pass through.
pub fn apply_alignment(
    batch: &DataBatch,
    weights: Option<&[f64]>,
    transform: &AlignmentTransform,
) -> Result<DataBatch> {
    if batch.dim() != transform.dim() {
        return Err(ObalError::DimensionMismatch {
            expected: transform.dim(),
            actual: batch.dim(),
        });
    }
    if let Some(w) = weights {
        if w.len() != batch.len() {
            return Err(ObalError::DimensionMismatch {
                expected: batch.len(),
                actual: w.len(),
            });
        }
    }
    let rows = batch
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let w = weights.map_or(1.0, |w| w[i]);
            let mut out = row.clone();
            out.features = transform.apply_row(&row.features, w)?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    DataBatch::new(rows, batch.dim(), batch.n_classes())
}

/// `‖Aᵀ C_S A − C_T‖_F²`, the alignment objective.
pub fn alignment_objective(a: &DMatrix<f64>, source: &CovMatrix, target: &CovMatrix) -> f64 {
    let diff = a.transpose() * &source.0 * a - &target.0;
    diff.norm_squared()
}
