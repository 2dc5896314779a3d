use nalgebra::RowDVector;

use super::spectral::{check_stochastic, stationary_distribution};
use super::ulam::TransitionMatrix;
use crate::{Error, Result};

/// Total-variation distance `½‖μ Tᵗ − π‖₁` for `t = 0..=steps`.
pub fn tv_convergence_curve(t: &TransitionMatrix, initial: &[f64], steps: usize) -> Result<Vec<f64>> {
    check_stochastic(&t.matrix)?;
    let k = t.size();
    if initial.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: initial.len(),
            context: "initial distribution",
        });
    }
    let total: f64 = initial.iter().sum();
    if initial.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::param("initial distribution must be non-negative and sum to 1"));
    }
    let pi = RowDVector::from_vec(stationary_distribution(&t.matrix));
    let mut mu = RowDVector::from_row_slice(initial);
    let mut out = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        out.push(0.5 * (&mu - &pi).abs().sum());
        if step < steps {
            mu = &mu * &t.matrix;
        }
    }
    Ok(out)
}
