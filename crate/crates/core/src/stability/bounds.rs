use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Label attached to perturbation bounds whose constant is not certified.
pub const ORDER_BOUND_LABEL: &str = "order bound";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub empirical: f64,
    pub population: f64,
    pub gap: f64,
}

/// Empirical risk from per-training-sample ergodic averages and a
/// population-risk estimate from held-out averages.
pub fn empirical_risks(train: &[f64], heldout: &[f64]) -> Result<RiskEstimate> {
    let mean = |xs: &[f64], what: &str| -> Result<f64> {
        if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::MissingStatistic(format!("{what} loss averages")));
        }
        Ok(xs.iter().sum::<f64>() / xs.len() as f64)
    };
    let empirical = mean(train, "training")?;
    let population = mean(heldout, "held-out")?;
    Ok(RiskEstimate {
        empirical,
        population,
        gap: (population - empirical).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub empirical_risk: f64,
    pub population_risk: Option<f64>,
    pub gap: Option<f64>,
    pub beta: f64,
    pub loss_bound: f64,
    pub n: usize,
    pub delta: f64,
    pub stability_term: f64,
    pub concentration_term: f64,
    /// `R̂ + β + 2(nβ + L)√(ln(2/δ)/(2n))`.
    pub bound: f64,
}

impl BoundReport {
    pub fn with_population(mut self, population: f64) -> Self {
        self.population_risk = Some(population);
        self.gap = Some((population - self.empirical_risk).abs());
        self
    }

    /// `bound − R̂`.
    pub fn excess(&self) -> f64 {
        self.stability_term + self.concentration_term
    }
}

pub fn theorem1_bound(empirical_risk: f64, beta: f64, n: usize, loss_bound: f64, delta: f64) -> Result<BoundReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(beta >= 0.0) || !(loss_bound >= 0.0) {
        return Err(Error::param("beta and the loss bound must be non-negative"));
    }
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let nf = n as f64;
    let concentration_term = 2.0 * (nf * beta + loss_bound) * ((2.0 / delta).ln() / (2.0 * nf)).sqrt();
    Ok(BoundReport {
        empirical_risk,
        population_risk: None,
        gap: None,
        beta,
        loss_bound,
        n,
        delta,
        stability_term: beta,
        concentration_term,
        bound: empirical_risk + beta + concentration_term,
    })
}

/// `C·m·L_D·η / (n²(1 − λ))`, an order-of-magnitude perturbation bound.
pub fn theorem2_bound(l_d: f64, lambda: f64, n: usize, m: usize, eta: f64, c: f64) -> Result<f64> {
    if !(lambda < 1.0) {
        return Err(Error::NotErgodic(lambda));
    }
    if !(lambda >= 0.0) || !(l_d >= 0.0) || !(eta >= 0.0) || !(c >= 0.0) {
        return Err(Error::param("inputs must be non-negative"));
    }
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let nf = n as f64;
    Ok(c * m as f64 * l_d * eta / (nf * nf * (1.0 - lambda)))
}

/// Stability coefficient of an orbit within `ε` of a `β`-stable
/// linearized orbit, for a `C_Lip`-Lipschitz loss: `β + 2·C_Lip·ε`.
pub fn ntk_stability_transfer(beta: f64, c_lip: f64, epsilon: f64) -> Result<f64> {
    if !(beta >= 0.0) || !(c_lip >= 0.0) || !(epsilon >= 0.0) {
        return Err(Error::param("inputs must be non-negative"));
    }
    Ok(beta + 2.0 * c_lip * epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_arithmetic() {
        let r = theorem1_bound(0.0, 0.0, 100, 1.0, 0.05).unwrap();
        let expected = 2.0 * (40f64.ln() / 200.0).sqrt();
        assert_eq!(r.bound, expected);
        assert!((r.excess() - 0.271_620_303_148_123_9).abs() < 1e-12);
    }

    #[test]
    fn slope_in_beta() {
        let h = 1e-6;
        let a = theorem1_bound(0.0, 0.0, 100, 1.0, 0.05).unwrap().bound;
        let b = theorem1_bound(0.0, h, 100, 1.0, 0.05).unwrap().bound;
        let slope = 1.0 + 200.0 * (40f64.ln() / 200.0).sqrt();
        assert!(((b - a) / h - slope).abs() < 1e-6);
        assert!((slope - 28.162_030_314_812_39).abs() < 1e-9);
    }

    #[test]
    fn delta_near_one() {
        let r = theorem1_bound(0.2, 0.0, 50, 1.0, 1.0 - 1e-12).unwrap();
        assert!((r.concentration_term - 2.0 * (2f64.ln() / 100.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(theorem1_bound(0.0, 0.0, 10, 1.0, 0.0).is_err());
        assert!(theorem1_bound(0.0, 0.0, 10, 1.0, 1.0).is_err());
        assert!(theorem1_bound(0.0, -0.1, 10, 1.0, 0.5).is_err());
        assert!(theorem1_bound(0.0, 0.0, 10, -1.0, 0.5).is_err());
        assert!(matches!(theorem2_bound(1.0, 1.0, 10, 1, 1.0, 1.0), Err(Error::NotErgodic(_))));
        assert!(ntk_stability_transfer(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn theorem2_values() {
        assert!((theorem2_bound(1.0, 0.0, 10, 10, 1.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        let a = theorem2_bound(1.0, 0.3, 10, 2, 0.1, 1.0).unwrap();
        let b = theorem2_bound(1.0, 0.3, 20, 2, 0.1, 1.0).unwrap();
        assert!((b / a - 0.25).abs() < 1e-15);
        let lams = [0.0, 0.5, 0.9, 0.99, 0.999999];
        let vals: Vec<f64> = lams.iter().map(|&l| theorem2_bound(1.0, l, 10, 2, 0.1, 1.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn transfer_values() {
        assert_eq!(ntk_stability_transfer(0.4, 3.0, 0.0).unwrap(), 0.4);
        assert!((ntk_stability_transfer(0.1, 2.0, 0.05).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn risks() {
        let r = empirical_risks(&[0.3; 4], &[0.3; 7]).unwrap();
        assert_eq!((r.empirical, r.population, r.gap), (0.3, 0.3, 0.0));
        let train = [0.1, 0.2, 0.4];
        assert_eq!(empirical_risks(&train, &train).unwrap().gap, 0.0);
        assert!(empirical_risks(&[], &[1.0]).is_err());
        assert!(empirical_risks(&[1.0], &[f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn theorem1_monotone(
            beta in 0.0..1.0f64, db in 0.0..1.0f64,
            l in 0.0..5.0f64, dl in 0.0..5.0f64,
            n in 1usize..1000,
            delta in 0.01..0.98f64, dd in 0.001..0.01f64,
        ) {
            let b = |beta, l, delta| theorem1_bound(0.1, beta, n, l, delta).unwrap().bound;
            let base = b(beta, l, delta);
            prop_assert!(b(beta + db, l, delta) >= base);
            prop_assert!(b(beta, l + dl, delta) >= base);
            prop_assert!(b(beta, l, delta + dd) < base || (beta == 0.0 && l == 0.0));
        }

        #[test]
        fn transfer_monotone(b in 0.0..1.0f64, c in 0.0..5.0f64, e in 0.0..1.0f64, d in 0.0..1.0f64) {
            let f = |b, c, e| ntk_stability_transfer(b, c, e).unwrap();
            prop_assert!(f(b + d, c, e) >= f(b, c, e));
            prop_assert!(f(b, c + d, e) >= f(b, c, e));
            prop_assert!(f(b, c, e + d) >= f(b, c, e));
        }
    }
}
