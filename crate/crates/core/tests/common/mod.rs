//! Test-only oracles and fixtures shared by integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use obal::streams::{DataBatch, Instance};

/// Random symmetric positive definite matrix `B Bᵀ + floor·I`.
pub fn random_spd<R: Rng>(rng: &mut R, d: usize, floor: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    &b * b.transpose() + DMatrix::identity(d, d) * floor
}

pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

/// Derivative-free Nelder-Mead minimizer with restarts around the best
/// vertex. Returns the best point and its value.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut best = (x0.to_vec(), f(x0));
    let mut evals = 1;
    let mut scale = step;
    while evals < max_evals {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push(best.clone());
        for i in 0..n {
            let mut p = best.0.clone();
            p[i] += scale;
            let v = f(&p);
            simplex.push((p, v));
        }
        evals += n;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[n].1 - simplex[0].1 <= tol * (1.0 + simplex[0].1.abs()) || evals >= max_evals {
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|p| p.0[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = f(&xr);
            evals += 1;
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = f(&xe);
                evals += 1;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let xc = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
                let fc = f(&xc);
                evals += 1;
                if fc < fr.min(simplex[n].1) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for p in simplex.iter_mut().skip(1) {
                        for (v, b) in p.0.iter_mut().zip(&x0) {
                            *v = b + 0.5 * (*v - b);
                        }
                        p.1 = f(&p.0);
                    }
                    evals += n;
                }
            }
        }
        let improved = simplex[0].1 < best.1 - tol * (1.0 + best.1.abs());
        best = simplex[0].clone();
        if !improved {
            scale *= 0.1;
            if scale < 1e-9 {
                break;
            }
        }
    }
    best
}

/// Labeled batch from raw rows.
pub fn labeled_batch(rows: Vec<(Vec<f64>, usize)>, n_classes: usize) -> DataBatch {
    let dim = rows[0].0.len();
    let inst = rows
        .into_iter()
        .enumerate()
        .map(|(t, (x, y))| Instance::labeled(x, y, t as u64))
        .collect();
    DataBatch::new(inst, dim, n_classes).unwrap()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
