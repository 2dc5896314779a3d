use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finite-window stand-in for the ergodic average `⟨ℓ_z⟩_S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicAverage {
    pub value: f64,
    pub runup: usize,
    pub window: usize,
    /// Cumulative means over the window, for convergence diagnostics.
    pub cumulative: Vec<f64>,
}

pub fn time_average(series: &[f64], runup: usize) -> Result<ErgodicAverage> {
    if series.len() <= runup {
        return Err(Error::InsufficientData(format!(
            "series of length {} has an empty window after runup {runup}",
            series.len()
        )));
    }
    let window = &series[runup..];
    let mut sum = 0.0;
    let cumulative: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect();
    Ok(ErgodicAverage {
        value: sum / window.len() as f64,
        runup,
        window: window.len(),
        cumulative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_series() {
        assert_eq!(time_average(&[2.5; 17], 3).unwrap().value, 2.5);
    }

    #[test]
    fn period_two() {
        let s: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect();
        assert_eq!(time_average(&s, 0).unwrap().value, 2.0);
    }

    #[test]
    fn cesaro_convergence() {
        let v = 1.7;
        let t = 10_000;
        let s: Vec<f64> = (0..t).map(|k| v + 0.9f64.powi(k)).collect();
        let avg = time_average(&s, 0).unwrap();
        // transient contributes (1 − 0.9^T)/(0.1 T)
        assert!((avg.cumulative.last().unwrap() - v - 10.0 / t as f64).abs() < 1e-9);
    }

    #[test]
    fn empty_window() {
        assert!(time_average(&[1.0, 2.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn translation_equivariant(xs in prop::collection::vec(-1e3f64..1e3, 1..200), c in -1e3f64..1e3) {
            let a = time_average(&xs, 0).unwrap().value;
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let b = time_average(&shifted, 0).unwrap().value;
            prop_assert!((b - (a + c)).abs() <= 1e-12 * (1.0 + a.abs() + c.abs()) * xs.len() as f64);
        }

        #[test]
        fn dyadic_translation_is_exact(xs in prop::collection::vec(-64i32..64, 1..64), c in -64i32..64) {
            // small integers and power-of-two lengths keep every sum exact
            let len = xs.len().next_power_of_two();
            let mut v: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
            v.resize(len, 0.0);
            let a = time_average(&v, 0).unwrap().value;
            let shifted: Vec<f64> = v.iter().map(|x| x + c as f64).collect();
            prop_assert_eq!(time_average(&shifted, 0).unwrap().value, a + c as f64);
        }
    }
}
