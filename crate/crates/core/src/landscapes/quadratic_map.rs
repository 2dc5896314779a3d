//! The one-dimensional family `ℓ_s = g_s ∘ g_s ∘ g_s` built from the
//! quadratic map `g_s(w) = 1 − s·w·(1 − w)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Landscape, Sample};
use crate::rng::RngStream;

pub fn gmap_eval(s: f64, w: f64) -> f64 {
    1.0 - s * w * (1.0 - w)
}

fn gmap_prime(s: f64, w: f64) -> f64 {
    s * (2.0 * w - 1.0)
}

pub fn gmap_loss(s: f64, w: f64) -> f64 {
    gmap_eval(s, gmap_eval(s, gmap_eval(s, w)))
}

/// `ℓ_s'(w) = g'(g(g(w)))·g'(g(w))·g'(w)`.
pub fn gmap_grad(s: f64, w: f64) -> f64 {
    let a = gmap_eval(s, w);
    let b = gmap_eval(s, a);
    gmap_prime(s, b) * gmap_prime(s, a) * gmap_prime(s, w)
}

/// Analytic `ℓ_s''(w)`; `g'' = 2s` is constant.
fn gmap_second(s: f64, w: f64) -> f64 {
    let a = gmap_eval(s, w);
    let b = gmap_eval(s, a);
    let (gw, ga, gb) = (gmap_prime(s, w), gmap_prime(s, a), gmap_prime(s, b));
    let g2 = 2.0 * s;
    // d/dw of gb·ga·gw with da/dw = gw, db/dw = ga·gw
    g2 * ga * gw * ga * gw + gb * g2 * gw * gw + gb * ga * g2
}

/// Sharpness `a(w) = |ℓ_s''(w)|`.
pub fn gmap_sharpness(s: f64, w: f64) -> f64 {
    gmap_second(s, w).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMapLoss {
    pub s: f64,
}

impl QuadraticMapLoss {
    pub fn new(s: f64) -> crate::Result<Self> {
        if !(s > 0.0 && s <= 4.0) {
            return Err(crate::Error::param(format!("s must lie in (0, 4], got {s}")));
        }
        Ok(Self { s })
    }

    pub fn g(&self, w: f64) -> f64 {
        gmap_eval(self.s, w)
    }

    pub fn g_prime(&self, w: f64) -> f64 {
        gmap_prime(self.s, w)
    }

    pub fn value(&self, w: f64) -> f64 {
        gmap_loss(self.s, w)
    }

    pub fn derivative(&self, w: f64) -> f64 {
        gmap_grad(self.s, w)
    }

    pub fn second_derivative(&self, w: f64) -> f64 {
        gmap_second(self.s, w)
    }

    pub fn sharpness(&self, w: f64) -> f64 {
        gmap_sharpness(self.s, w)
    }

    /// `‖a‖ = sup_{w∈[0,1]} a(w)` on a uniform grid with `points` nodes.
    pub fn sup_sharpness(&self, points: usize) -> f64 {
        let points = points.max(2);
        (0..points)
            .map(|i| self.sharpness(i as f64 / (points - 1) as f64))
            .fold(0.0, f64::max)
    }

    /// Gradient-descent map `φ(w) = w − η ℓ_s'(w)`.
    pub fn gd_map(&self, eta: f64, w: f64) -> f64 {
        w - eta * self.derivative(w)
    }

    /// `φ'(w) = 1 − η ℓ_s''(w)`.
    pub fn gd_map_derivative(&self, eta: f64, w: f64) -> f64 {
        1.0 - eta * self.second_derivative(w)
    }
}

impl Landscape for QuadraticMapLoss {
    fn dim(&self) -> usize {
        1
    }

    fn loss(&self, _z: &Sample, w: &[f64]) -> f64 {
        self.value(w[0])
    }

    fn grad(&self, _z: &Sample, w: &[f64], grad: &mut [f64]) {
        grad[0] = self.derivative(w[0]);
    }

    fn initial_weights(&self, rng: &mut RngStream) -> Vec<f64> {
        vec![rng.random::<f64>()]
    }
}
