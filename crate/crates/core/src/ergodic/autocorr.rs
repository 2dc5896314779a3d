use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `C_ℓ(τ) = |mean_t[ℓ_t ℓ_{t+τ}] − ⟨ℓ⟩²| / ⟨ℓ⟩²` for `τ = 0..=tau_max`.
///
/// This is the non-mean-subtracted product form: the normalisation is by
/// the squared mean, not the variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSeries {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Set when `⟨ℓ⟩²` was too small to normalise by; `values` are then the
    /// unnormalised `|mean_t[ℓ_t ℓ_{t+τ}] − ⟨ℓ⟩²|`.
    pub guard: bool,
    pub runup: usize,
    /// Number of base points `t` used at every lag.
    pub window: usize,
}

impl AutocorrSeries {
    pub fn tau_max(&self) -> usize {
        self.values.len() - 1
    }

    /// Mean of `C(τ)` over `τ ∈ [lo, hi]`.
    pub fn mean_over(&self, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.tau_max());
        let vals = &self.values[lo.min(hi)..=hi];
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Mean of `|C(τ)|` over `τ ∈ [lo, hi]`.
    pub fn mean_abs_over(&self, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.tau_max());
        let vals = &self.values[lo.min(hi)..=hi];
        vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64
    }
}

pub fn autocorrelation(series: &[f64], runup: usize, tau_max: usize) -> Result<AutocorrSeries> {
    if series.len() <= runup + tau_max {
        return Err(Error::InsufficientData(format!(
            "series of length {} too short for runup {runup} and tau_max {tau_max}",
            series.len()
        )));
    }
    let x = &series[runup..];
    // every lag uses the same base window t ∈ [0, w)
    let w = x.len() - tau_max;
    let mean = x[..w].iter().sum::<f64>() / w as f64;
    let m2 = mean * mean;
    let max_sq = x.iter().fold(0.0f64, |a, v| a.max(v * v));
    let guard = m2 < 1e-12 * max_sq || m2 == 0.0;
    let values = (0..=tau_max)
        .map(|tau| {
            let prod = x[..w].iter().zip(&x[tau..tau + w]).map(|(a, b)| a * b).sum::<f64>() / w as f64;
            let c = (prod - m2).abs();
            if guard {
                c
            } else {
                c / m2
            }
        })
        .collect();
    Ok(AutocorrSeries {
        values,
        mean,
        guard,
        runup,
        window: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn window_means() {
        let c = AutocorrSeries {
            values: vec![1.0, -0.5, 0.25, -0.25],
            mean: 1.0,
            guard: false,
            runup: 0,
            window: 10,
        };
        assert_eq!(c.mean_over(1, 3), -0.5 / 3.0);
        assert_eq!(c.mean_abs_over(1, 3), 1.0 / 3.0);
        assert_eq!(c.mean_abs_over(2, 99), 0.25);
    }

    #[test]
    fn constant_series_has_zero_correlation() {
        let c = autocorrelation(&[2.5; 300], 10, 20).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
        assert!(!c.guard);
    }

    #[test]
    fn period_two_closed_form() {
        let s: Vec<f64> = (0..102).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect();
        let c = autocorrelation(&s, 0, 2).unwrap();
        assert_eq!(c.window, 100);
        assert_eq!(c.mean, 2.0);
        assert_eq!(c.values[0], 0.25);
        assert_eq!(c.values[1], 0.25);
        assert_eq!(c.values[2], 0.25);
    }

    #[test]
    fn iid_noise_decorrelates() {
        let mut rng = RngStream::new(2, 0);
        let t = 20_000;
        let s: Vec<f64> = (0..t + 10).map(|_| 1.0 + rng.random::<f64>()).collect();
        let c = autocorrelation(&s, 0, 10).unwrap();
        for &v in &c.values[1..] {
            assert!(v < 5.0 / (t as f64).sqrt(), "{v}");
        }
    }

    #[test]
    fn zero_mean_sets_guard() {
        let s: Vec<f64> = (0..101).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let c = autocorrelation(&s, 0, 1).unwrap();
        assert!(c.guard);
        assert_eq!(c.values[0], 1.0);
    }

    #[test]
    fn too_short() {
        assert!(autocorrelation(&[1.0; 10], 5, 5).is_err());
    }

    proptest! {
        #[test]
        fn power_of_two_rescaling_is_exact(xs in prop::collection::vec(0.1f64..10.0, 30..120), k in -8i32..8) {
            let scale = 2f64.powi(k);
            let a = autocorrelation(&xs, 0, 5).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| x * scale).collect();
            let b = autocorrelation(&ys, 0, 5).unwrap();
            prop_assert_eq!(a.values, b.values);
        }

        #[test]
        fn positive_rescaling_invariant(xs in prop::collection::vec(0.1f64..10.0, 30..120), scale in 0.01f64..100.0) {
            let a = autocorrelation(&xs, 0, 5).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| x * scale).collect();
            let b = autocorrelation(&ys, 0, 5).unwrap();
            for (u, v) in a.values.iter().zip(&b.values) {
                prop_assert!((u - v).abs() <= 1e-12 + 1e-9 * u.abs());
            }
        }
    }
}
