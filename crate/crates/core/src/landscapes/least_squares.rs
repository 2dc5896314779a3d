use serde::{Deserialize, Serialize};

use super::{Landscape, Sample};

/// Linear least squares `ℓ(z, w) = (y − xᵀ(w − w_r))² / 2`.
///
/// With `x` holding the tangent features `∇h(x, w_r)` this is the per-sample
/// loss of the linearized (NTK) model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeastSquares {
    pub reference: Vec<f64>,
}

impl LeastSquares {
    pub fn new(dim: usize) -> Self {
        Self {
            reference: vec![0.0; dim],
        }
    }

    pub fn with_reference(reference: Vec<f64>) -> Self {
        Self { reference }
    }

    pub fn residual(&self, z: &Sample, w: &[f64]) -> f64 {
        let pred: f64 = z
            .x
            .iter()
            .zip(w.iter().zip(&self.reference))
            .map(|(x, (w, r))| x * (w - r))
            .sum();
        z.y - pred
    }
}

impl Landscape for LeastSquares {
    fn dim(&self) -> usize {
        self.reference.len()
    }

    fn input_dim(&self) -> Option<usize> {
        Some(self.reference.len())
    }

    fn loss(&self, z: &Sample, w: &[f64]) -> f64 {
        0.5 * self.residual(z, w).powi(2)
    }

    fn grad(&self, z: &Sample, w: &[f64], grad: &mut [f64]) {
        let r = self.residual(z, w);
        for (g, x) in grad.iter_mut().zip(&z.x) {
            *g = -r * x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_regression() {
        let ls = LeastSquares::new(1);
        let z = Sample::new(vec![2.0], 3.0);
        assert_eq!(ls.loss(&z, &[1.0]), 0.5);
        let mut g = [0.0];
        ls.grad(&z, &[1.0], &mut g);
        assert_eq!(g[0], -2.0);
    }
}
