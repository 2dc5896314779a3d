//! Loss models with analytic per-sample losses and gradients.

mod dataset;
mod least_squares;
pub(crate) mod linearized;
mod lipschitz;
mod quadratic_map;
mod toynet;

pub use dataset::{make_dataset, SyntheticDataset, Teacher, TeacherKind};
pub use least_squares::LeastSquares;
pub use linearized::{LinearizedModel, MixingRate};
pub use lipschitz::{grad_data_lipschitz, LipschitzEstimate};
pub use quadratic_map::{gmap_eval, gmap_grad, gmap_loss, gmap_sharpness, QuadraticMapLoss};
pub use toynet::{Activation, LossKind, ToyNet};

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

/// One data point `z = (x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }

    /// Sample without inputs, for landscapes whose loss ignores the data.
    pub fn empty() -> Self {
        Self { x: Vec::new(), y: 0.0 }
    }

    /// Euclidean distance between `(x, y)` and `(x', y')`.
    pub fn distance(&self, other: &Sample) -> f64 {
        let dx: f64 = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (dx + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A per-sample loss `ℓ(z, w)` together with its weight gradient.
///
/// Implementations are immutable after construction and shared read-only
/// across parallel orbit workers.
pub trait Landscape: Send + Sync {
    /// Number of weights `d_w`.
    fn dim(&self) -> usize;

    /// Required length of `Sample::x`, if the loss reads it.
    fn input_dim(&self) -> Option<usize> {
        None
    }

    fn loss(&self, z: &Sample, w: &[f64]) -> f64;

    /// Overwrites `grad` with `∇_w ℓ(z, w)`.
    fn grad(&self, z: &Sample, w: &[f64], grad: &mut [f64]);

    /// 0-1 classification error, for landscapes that make sign predictions.
    fn zero_one(&self, _z: &Sample, _w: &[f64]) -> Option<f64> {
        None
    }

    fn initial_weights(&self, _rng: &mut RngStream) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

impl<L: Landscape + ?Sized> Landscape for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn input_dim(&self) -> Option<usize> {
        (**self).input_dim()
    }
    fn loss(&self, z: &Sample, w: &[f64]) -> f64 {
        (**self).loss(z, w)
    }
    fn grad(&self, z: &Sample, w: &[f64], grad: &mut [f64]) {
        (**self).grad(z, w, grad)
    }
    fn zero_one(&self, z: &Sample, w: &[f64]) -> Option<f64> {
        (**self).zero_one(z, w)
    }
    fn initial_weights(&self, rng: &mut RngStream) -> Vec<f64> {
        (**self).initial_weights(rng)
    }
}

/// Mean loss over a set of samples.
pub fn mean_loss<L: Landscape + ?Sized>(landscape: &L, samples: &[Sample], w: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|z| landscape.loss(z, w)).sum::<f64>() / samples.len() as f64
}

#[cfg(test)]
pub(crate) mod testutil {
    /// Central finite difference of a scalar function.
    pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    pub fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
    }
}
