use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometric-decay fit `C(τ) ≈ C₀ λ^τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingFit {
    /// `λ̂ = exp(slope)`, capped at 1.
    pub rate: f64,
    /// `C₀ = exp(intercept)`.
    pub prefactor: f64,
    pub slope: f64,
    pub points_used: usize,
    /// Non-positive values skipped before taking logs.
    pub dropped: usize,
    /// Set when the fitted slope was positive and the rate was capped.
    pub capped: bool,
}

/// Least-squares slope of `log C(τ)` against `τ` over `lags` (indices into
/// `values`).
pub fn mixing_rate_fit(values: &[f64], lags: std::ops::Range<usize>) -> Result<MixingFit> {
    let lags = lags.start..lags.end.min(values.len());
    let pts: Vec<(f64, f64)> = lags
        .clone()
        .filter(|&t| values[t] > 0.0 && values[t].is_finite())
        .map(|t| (t as f64, values[t].ln()))
        .collect();
    let dropped = lags.len() - pts.len();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 positive values in the fit window, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(MixingFit {
        rate: slope.exp().min(1.0),
        prefactor: intercept.exp(),
        slope,
        points_used: pts.len(),
        dropped,
        capped: slope > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn exact_geometric() {
        let c: Vec<f64> = (0..30).map(|t| 0.8f64.powi(t)).collect();
        let fit = mixing_rate_fit(&c, 0..30).unwrap();
        assert!((fit.rate - 0.8).abs() < 1e-10);
    }

    #[test]
    fn offset_goes_to_prefactor() {
        let c: Vec<f64> = (0..30).map(|t| 0.5 * 0.9f64.powi(t)).collect();
        let fit = mixing_rate_fit(&c, 1..30).unwrap();
        assert!((fit.rate - 0.9).abs() < 1e-10);
        assert!((fit.prefactor - 0.5).abs() < 1e-10);
    }

    #[test]
    fn noisy_geometric() {
        let mut rng = RngStream::new(8, 0);
        let c: Vec<f64> = (0..40)
            .map(|t| 0.85f64.powi(t) * (1.0 + rng.random_range(-0.05..0.05)))
            .collect();
        let fit = mixing_rate_fit(&c, 0..40).unwrap();
        assert!((fit.rate - 0.85).abs() < 0.02);
    }

    #[test]
    fn skips_non_positive_and_errors_when_short() {
        let fit = mixing_rate_fit(&[1.0, 0.0, 0.25, -1.0, 0.0625], 0..5).unwrap();
        assert_eq!(fit.dropped, 2);
        assert!((fit.rate - 0.5).abs() < 1e-12);
        assert!(mixing_rate_fit(&[1.0, 0.0, 0.5], 0..3).is_err());
    }

    #[test]
    fn growth_is_capped() {
        let fit = mixing_rate_fit(&[1.0, 2.0, 4.0], 0..3).unwrap();
        assert!(fit.capped);
        assert_eq!(fit.rate, 1.0);
    }
}
