use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_LOG_FLOOR: f64 = 1e-300;

/// Finite-time Lyapunov exponent of a one-dimensional map, in nats/step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub steps: usize,
    pub runup: usize,
    /// Steps where `|φ'(w_t)|` fell below the floor; each contributes `−∞`.
    pub floor_hits: usize,
    pub log_derivatives: Option<Vec<f64>>,
}

/// `(1/T) Σ_{t=runup}^{runup+T−1} log|φ'(w_t)|` along the orbit of `evolve`.
pub fn lyapunov_1d(
    map_derivative: impl Fn(f64) -> f64,
    w0: f64,
    evolve: impl Fn(f64) -> f64,
    steps: usize,
    runup: usize,
    keep_series: bool,
) -> Result<LyapunovEstimate> {
    if steps == 0 {
        return Err(Error::param("Lyapunov estimate needs at least one step"));
    }
    let mut w = w0;
    for _ in 0..runup {
        w = evolve(w);
    }
    let mut sum = 0.0;
    let mut floor_hits = 0;
    let mut logs = keep_series.then(|| Vec::with_capacity(steps));
    for _ in 0..steps {
        let d = map_derivative(w).abs();
        let l = if d < DEFAULT_LOG_FLOOR {
            floor_hits += 1;
            f64::NEG_INFINITY
        } else {
            d.ln()
        };
        sum += l;
        if let Some(v) = logs.as_mut() {
            v.push(l);
        }
        w = evolve(w);
    }
    Ok(LyapunovEstimate {
        value: sum / steps as f64,
        steps,
        runup,
        floor_hits,
        log_derivatives: logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{gmap_eval, QuadraticMapLoss};

    #[test]
    fn linear_contraction() {
        let est = lyapunov_1d(|_| 0.5, 1.0, |w| 0.5 * w, 100, 0, false).unwrap();
        assert!((est.value - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gd_on_half_square() {
        let eta = 0.5;
        let est = lyapunov_1d(|_| 1.0 - eta, 1.0, |w| w - eta * w, 50, 0, false).unwrap();
        assert!((est.value - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn full_chaos_quadratic_map() {
        let est = lyapunov_1d(
            |w| 4.0 * (2.0 * w - 1.0),
            0.1234567,
            |w| gmap_eval(4.0, w),
            1_000_000,
            100,
            false,
        )
        .unwrap();
        assert!((est.value - 2f64.ln()).abs() < 0.01, "{}", est.value);
    }

    #[test]
    fn converging_gd_orbit() {
        let q = QuadraticMapLoss::new(1.0).unwrap();
        let eta = 2.0;
        let est = lyapunov_1d(|w| q.gd_map_derivative(eta, w), 0.3, |w| q.gd_map(eta, w), 5000, 500, false).unwrap();
        let target = (1.0 - eta * q.second_derivative(0.5)).abs().ln();
        assert!((est.value - target).abs() < 1e-3);
    }

    #[test]
    fn floor_hit_is_flagged() {
        let est = lyapunov_1d(|_| 0.0, 1.0, |w| w, 3, 0, true).unwrap();
        assert_eq!(est.floor_hits, 3);
        assert_eq!(est.value, f64::NEG_INFINITY);
    }
}
