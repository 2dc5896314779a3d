use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ulam::TransitionMatrix;
use crate::{Error, Result};

/// Matrices up to this size get a full dense eigen-solve.
pub const DENSE_LIMIT: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Eigenvalue moduli, descending. Beyond [`DENSE_LIMIT`] only the
    /// leading two are computed.
    pub moduli: Vec<f64>,
    /// `(re, im)` pairs matching `moduli` (dense path only).
    pub eigenvalues: Vec<(f64, f64)>,
    pub lambda2: f64,
    /// `1 − |λ₂|`, clamped to `[0, 1]`.
    pub gap: f64,
    pub stationary: Vec<f64>,
    pub method: String,
}

pub(crate) fn check_stochastic(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::NotStochastic(format!("shape {:?} is not square", m.shape())));
    }
    if let Some(v) = m.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::NotStochastic(format!("entry {v} is negative or non-finite")));
    }
    for (i, row) in m.row_iter().enumerate() {
        let s = row.sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

pub fn spectral_gap(t: &TransitionMatrix) -> Result<SpectralReport> {
    let m = &t.matrix;
    check_stochastic(m)?;
    if m.nrows() <= DENSE_LIMIT {
        dense(m)
    } else {
        power(m)
    }
}

fn dense(m: &DMatrix<f64>) -> Result<SpectralReport> {
    let ev = m.complex_eigenvalues();
    let mut pairs: Vec<(f64, f64)> = ev.iter().map(|c| (c.re, c.im)).collect();
    pairs.sort_by(|a, b| b.0.hypot(b.1).total_cmp(&a.0.hypot(a.1)).then(b.0.total_cmp(&a.0)));
    let moduli: Vec<f64> = pairs.iter().map(|p| p.0.hypot(p.1)).collect();
    let lambda2 = moduli.get(1).copied().unwrap_or(0.0).min(1.0);
    Ok(SpectralReport {
        moduli,
        eigenvalues: pairs,
        lambda2,
        gap: (1.0 - lambda2).clamp(0.0, 1.0),
        stationary: stationary_distribution(m),
        method: "dense".into(),
    })
}

fn power(m: &DMatrix<f64>) -> Result<SpectralReport> {
    let k = m.nrows();
    let mt = m.transpose();
    let stationary = power_stationary(&mt);
    // left eigenvectors of non-unit eigenvalues have zero sum
    let mut x = DVector::from_fn(k, |i, _| ((i * 7919 % 104_729) as f64).sin());
    let project = |x: &mut DVector<f64>| {
        let mean = x.mean();
        x.add_scalar_mut(-mean);
    };
    project(&mut x);
    x /= x.norm().max(f64::MIN_POSITIVE);
    let (iters, tail) = (2000, 200);
    let mut log_growth = 0.0;
    for it in 0..iters {
        let mut y = &mt * &x;
        project(&mut y);
        let norm = y.norm();
        if norm == 0.0 {
            log_growth = f64::NEG_INFINITY;
            break;
        }
        if it >= iters - tail {
            log_growth += norm.ln();
        }
        x = y / norm;
    }
    let lambda2 = (log_growth / tail as f64).exp().min(1.0);
    Ok(SpectralReport {
        moduli: vec![1.0, lambda2],
        eigenvalues: Vec::new(),
        lambda2,
        gap: (1.0 - lambda2).clamp(0.0, 1.0),
        stationary: stationary.iter().copied().collect(),
        method: "power iteration with deflation".into(),
    })
}

fn power_stationary(mt: &DMatrix<f64>) -> DVector<f64> {
    let k = mt.nrows();
    let mut p = DVector::from_element(k, 1.0 / k as f64);
    for _ in 0..10_000 {
        let q = mt * &p;
        let done = (&q - &p).abs().sum() < 1e-14;
        p = q;
        if done {
            break;
        }
    }
    p
}

/// Leading left eigenvector, normalised to a probability vector: the
/// null vector of `Tᵀ − I` with the smallest singular value.
pub fn stationary_distribution(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    if k > DENSE_LIMIT {
        return power_stationary(&m.transpose()).iter().copied().collect();
    }
    let a = m.transpose() - DMatrix::identity(k, k);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let v: Vec<f64> = v_t.row(imin).iter().map(|x| x.abs()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}
