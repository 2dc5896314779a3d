//! Linearized (NTK-regime) model: gradient descent on the squared loss of
//! `Φ(w − w_r)` is the affine map `w ↦ A w + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use rand_distr::{Distribution, StandardNormal};

use super::{LeastSquares, Sample};
use crate::rng::RngStream;
use crate::{Error, Result};

const RANDOM_MODEL_STREAM: u64 = 0x7A7C;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizedModel {
    /// `n × d_w` matrix whose rows are the tangent features `∇h(x_i, w_r)`.
    pub features: DMatrix<f64>,
    pub labels: DVector<f64>,
    pub reference: DVector<f64>,
    pub eta: f64,
    /// Ridge added to `ΦΦᵀ` when solving for the interpolant; 0 by default.
    pub ridge: f64,
}

/// Convergence rate of the affine dynamics along the row space of `Φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingRate {
    /// `λ = 1 − η θ_min`.
    pub rate: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// `max_i |1 − η θ_i|` over the NTK eigenvalues; the contraction factor
    /// of `‖w_t − w*‖` for orbits started in `w_r + row(Φ)`.
    pub contraction: f64,
    /// Set when the contraction factor is not below 1.
    pub warning: Option<String>,
}

impl LinearizedModel {
    pub fn new(
        features: DMatrix<f64>,
        labels: DVector<f64>,
        reference: DVector<f64>,
        eta: f64,
    ) -> Result<Self> {
        let (n, d) = features.shape();
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: labels.len(),
                context: "labels vs feature rows",
            });
        }
        if reference.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: reference.len(),
                context: "reference weights vs feature columns",
            });
        }
        if !(eta >= 0.0) {
            return Err(Error::param(format!("eta must be non-negative, got {eta}")));
        }
        Ok(Self {
            features,
            labels,
            reference,
            eta,
            ridge: 0.0,
        })
    }

    /// Standard Gaussian features, labels and reference weights drawn from
    /// `seed`.
    pub fn random(n: usize, d_w: usize, eta: f64, seed: u64) -> Result<Self> {
        let mut rng = RngStream::new(seed, RANDOM_MODEL_STREAM);
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let features = DMatrix::from_fn(n, d_w, |_, _| draw());
        let labels = DVector::from_fn(n, |_, _| draw());
        let reference = DVector::from_fn(d_w, |_, _| draw());
        Self::new(features, labels, reference, eta)
    }

    /// The same model with feature row `row` redrawn from `seed`: the
    /// linearized counterpart of replacing one training sample.
    pub fn with_row_redrawn(&self, row: usize, seed: u64) -> Result<Self> {
        if row >= self.n() {
            return Err(Error::param(format!("row {row} out of range for n = {}", self.n())));
        }
        let mut rng = RngStream::derived(seed, &[RANDOM_MODEL_STREAM, row as u64]);
        let mut out = self.clone();
        for j in 0..self.dim() {
            out.features[(row, j)] = StandardNormal.sample(&mut rng);
        }
        out.labels[row] = StandardNormal.sample(&mut rng);
        Ok(out)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Weight-space kernel `K = ΦᵀΦ` (`d_w × d_w`).
    pub fn weight_kernel(&self) -> DMatrix<f64> {
        self.features.transpose() * &self.features
    }

    /// Empirical NTK `K̂ = ΦΦᵀ` (`n × n`).
    pub fn ntk(&self) -> DMatrix<f64> {
        &self.features * self.features.transpose()
    }

    /// NTK eigenvalues in ascending order.
    pub fn ntk_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(self.ntk())
    }

    /// `A = I − η ΦᵀΦ`, `b = η(ΦᵀΦ w_r + Φᵀ Y)`.
    pub fn linearized_dynamics(&self) -> (DMatrix<f64>, DVector<f64>) {
        let k = self.weight_kernel();
        let d = self.dim();
        let a = DMatrix::identity(d, d) - &k * self.eta;
        let b = (&k * &self.reference + self.features.transpose() * &self.labels) * self.eta;
        (a, b)
    }

    /// Minimum-norm interpolant `w* = w_r + Φᵀ(ΦΦᵀ + ridge·I)⁻¹ Y`.
    pub fn ntk_fixed_point(&self) -> Result<DVector<f64>> {
        let mut k = self.ntk();
        let n = k.nrows();
        if self.ridge > 0.0 {
            k += DMatrix::identity(n, n) * self.ridge;
        } else {
            let eig = sorted_eigenvalues(k.clone());
            let (lo, hi) = (eig[0], eig[n - 1]);
            if !(lo > hi.abs() * 1e-12 * n as f64) {
                return Err(Error::Singular(format!(
                    "NTK is rank deficient (θ_min = {lo:e}, θ_max = {hi:e}); set a ridge"
                )));
            }
        }
        let chol = k
            .cholesky()
            .ok_or_else(|| Error::Singular("NTK is not positive definite".into()))?;
        let alpha = chol.solve(&self.labels);
        Ok(&self.reference + self.features.transpose() * alpha)
    }

    pub fn ntk_mixing_rate(&self) -> MixingRate {
        let eig = self.ntk_eigenvalues();
        let theta_min = eig.first().copied().unwrap_or(0.0);
        let theta_max = eig.last().copied().unwrap_or(0.0);
        let contraction = eig
            .iter()
            .map(|t| (1.0 - self.eta * t).abs())
            .fold(0.0, f64::max);
        let warning = (contraction >= 1.0).then(|| {
            format!(
                "no convergence: max |1 − ηθ| = {contraction} ≥ 1 (η = {}, θ ∈ [{theta_min}, {theta_max}])",
                self.eta
            )
        });
        MixingRate {
            rate: 1.0 - self.eta * theta_min,
            theta_min,
            theta_max,
            contraction,
            warning,
        }
    }

    /// Iterates `w ↦ A w + b` and returns `w_0, …, w_steps`.
    pub fn orbit(&self, w0: &DVector<f64>, steps: usize) -> Vec<DVector<f64>> {
        let (a, b) = self.linearized_dynamics();
        let mut out = Vec::with_capacity(steps + 1);
        let mut w = w0.clone();
        out.push(w.clone());
        for _ in 0..steps {
            w = &a * &w + &b;
            out.push(w.clone());
        }
        out
    }

    /// Training samples in the `(features, label)` form consumed by
    /// [`LeastSquares`].
    pub fn samples(&self) -> Vec<Sample> {
        self.features
            .row_iter()
            .zip(self.labels.iter())
            .map(|(row, &y)| Sample::new(row.iter().copied().collect(), y))
            .collect()
    }

    pub fn landscape(&self) -> LeastSquares {
        LeastSquares::with_reference(self.reference.iter().copied().collect())
    }
}

pub(crate) fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_model(n: usize, d: usize, eta: f64, seed: u64) -> LinearizedModel {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let phi = DMatrix::from_fn(n, d, |_, _| g() / (d as f64).sqrt());
        let y = DVector::from_fn(n, |_, _| g());
        let wr = DVector::from_fn(d, |_, _| g() * 0.1);
        LinearizedModel::new(phi, y, wr, eta).unwrap()
    }

    #[test]
    fn identity_features() {
        let m = LinearizedModel::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::zeros(2),
            0.1,
        )
        .unwrap();
        let (a, b) = m.linearized_dynamics();
        assert!((a - DMatrix::identity(2, 2) * 0.9).abs().max() < 1e-15);
        assert!((b - DVector::from_vec(vec![0.1, 0.2])).abs().max() < 1e-15);
        let w = m.ntk_fixed_point().unwrap();
        assert!((w - DVector::from_vec(vec![1.0, 2.0])).abs().max() < 1e-15);
        let rate = m.ntk_mixing_rate();
        assert_eq!(rate.theta_min, 1.0);
        assert!((rate.rate - 0.9).abs() < 1e-15);
        assert!(rate.warning.is_none());
    }

    #[test]
    fn zero_learning_rate() {
        let m = random_model(3, 5, 0.0, 1);
        let (a, b) = m.linearized_dynamics();
        assert_eq!(a, DMatrix::identity(5, 5));
        assert_eq!(b, DVector::zeros(5));
        let rate = m.ntk_mixing_rate();
        assert_eq!(rate.rate, 1.0);
        assert!(rate.warning.is_some());
    }

    #[test]
    fn mixing_rate_two_by_two() {
        // ΦΦᵀ = diag(1, 4)
        let phi = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
        let m = LinearizedModel::new(phi, DVector::zeros(2), DVector::zeros(3), 0.1).unwrap();
        let rate = m.ntk_mixing_rate();
        assert!((rate.theta_min - 1.0).abs() < 1e-14);
        assert!((rate.theta_max - 4.0).abs() < 1e-14);
        assert!((rate.rate - 0.9).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_and_interpolation() {
        let m = random_model(6, 20, 0.2, 7);
        let w = m.ntk_fixed_point().unwrap();
        let (a, b) = m.linearized_dynamics();
        assert!((&a * &w + &b - &w).norm() < 1e-10);
        let resid = &m.labels - &m.features * (&w - &m.reference);
        assert!(resid.norm() < 1e-10 * m.labels.norm());
    }

    #[test]
    fn rank_deficient_kernel_is_singular() {
        let phi = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let m = LinearizedModel::new(phi, DVector::from_vec(vec![1.0, 1.0]), DVector::zeros(3), 0.1)
            .unwrap();
        assert!(matches!(m.ntk_fixed_point(), Err(Error::Singular(_))));
        // ridge makes it solvable
        assert!(m.with_ridge(1e-3).ntk_fixed_point().is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        let err = LinearizedModel::new(
            DMatrix::identity(2, 3),
            DVector::zeros(3),
            DVector::zeros(3),
            0.1,
        );
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }
}
