//! Attractors of gradient descent on the quadratic-map family as a
//! function of the learning rate.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::period::{detect_period, Period};
use crate::dynamics::WeightDomain;
use crate::landscapes::QuadraticMapLoss;
use crate::rng::RngStream;
use crate::{Error, Result};

const INIT_STREAM: u64 = 0xB1F0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub n_inits: usize,
    pub runup: usize,
    pub keep_k: usize,
    /// Absolute clustering tolerance for the period detector.
    pub tol: f64,
    pub divergence_radius: f64,
    pub domain: WeightDomain,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            n_inits: 100,
            runup: 2000,
            keep_k: 200,
            tol: 1e-6,
            divergence_radius: 1e6,
            domain: WeightDomain::unit_interval(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCell {
    pub eta: f64,
    pub init_id: usize,
    pub w0: f64,
    /// Last `keep_k` post-runup iterates (truncated on divergence).
    pub samples: Vec<f64>,
    pub period: Option<Period>,
    pub diverged_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub s: f64,
    pub eta_grid: Vec<f64>,
    pub settings: ScanSettings,
    /// Row-major over `(eta, init)`.
    pub cells: Vec<BifurcationCell>,
}

impl BifurcationScan {
    pub fn cells_at(&self, eta_index: usize) -> &[BifurcationCell] {
        let k = self.settings.n_inits;
        &self.cells[eta_index * k..(eta_index + 1) * k]
    }

    pub fn diverged_count(&self, eta_index: usize) -> usize {
        self.cells_at(eta_index)
            .iter()
            .filter(|c| c.diverged_at.is_some())
            .count()
    }

    /// Period at one learning rate, over the surviving initial conditions:
    /// aperiodic if any orbit is, otherwise the largest detected period.
    /// `None` when every orbit diverged.
    pub fn period_at(&self, eta_index: usize) -> Option<Period> {
        let periods: Vec<Period> = self.cells_at(eta_index).iter().filter_map(|c| c.period).collect();
        if periods.is_empty() {
            return None;
        }
        if periods.contains(&Period::Aperiodic) {
            return Some(Period::Aperiodic);
        }
        periods
            .iter()
            .filter_map(|p| match p {
                Period::Periodic(q) => Some(*q),
                Period::Aperiodic => None,
            })
            .max()
            .map(Period::Periodic)
    }
}

/// Initial conditions shared by every learning rate of a scan.
pub fn scan_inits(master_seed: u64, n_inits: usize) -> Vec<f64> {
    (0..n_inits)
        .map(|i| RngStream::derived(master_seed, &[INIT_STREAM, i as u64]).random::<f64>())
        .collect()
}

pub fn bifurcation_scan(
    landscape: &QuadraticMapLoss,
    eta_grid: &[f64],
    settings: &ScanSettings,
    master_seed: u64,
) -> Result<BifurcationScan> {
    if settings.n_inits == 0 {
        return Err(Error::param("n_inits must be at least 1"));
    }
    if settings.keep_k == 0 {
        return Err(Error::param("keep_k must be at least 1"));
    }
    if eta_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::param("eta grid must be sorted ascending"));
    }
    if eta_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::param("learning rates must be positive"));
    }
    let inits = scan_inits(master_seed, settings.n_inits);
    let jobs: Vec<(f64, usize)> = eta_grid
        .iter()
        .flat_map(|&eta| (0..settings.n_inits).map(move |i| (eta, i)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(eta, i)| run_cell(landscape, eta, i, inits[i], settings))
        .collect();
    Ok(BifurcationScan {
        s: landscape.s,
        eta_grid: eta_grid.to_vec(),
        settings: settings.clone(),
        cells,
    })
}

fn run_cell(
    landscape: &QuadraticMapLoss,
    eta: f64,
    init_id: usize,
    w0: f64,
    settings: &ScanSettings,
) -> BifurcationCell {
    let domain = settings.domain;
    let mut w = domain.wrap(w0);
    let mut samples = Vec::with_capacity(settings.keep_k);
    let mut diverged_at = None;
    for t in 1..=settings.runup + settings.keep_k {
        w = domain.wrap(landscape.gd_map(eta, w));
        if !w.is_finite() || w.abs() > settings.divergence_radius {
            diverged_at = Some(t);
            break;
        }
        if t > settings.runup {
            samples.push(w);
        }
    }
    let period = diverged_at
        .is_none()
        .then(|| detect_period(&samples, settings.tol, Some((settings.keep_k / 4).max(1))));
    BifurcationCell {
        eta,
        init_id,
        w0,
        samples,
        period,
        diverged_at,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_orbit, Observable, OptimizerConfig, Schedule};
    use crate::landscapes::Sample;

    fn settings(n_inits: usize) -> ScanSettings {
        ScanSettings {
            n_inits,
            ..Default::default()
        }
    }

    fn s1() -> QuadraticMapLoss {
        QuadraticMapLoss::new(1.0).unwrap()
    }

    #[test]
    fn below_threshold_converges_to_minimum() {
        let scan = bifurcation_scan(&s1(), &[0.05, 3.0], &settings(20), 1).unwrap();
        for e in 0..2 {
            assert_eq!(scan.period_at(e), Some(Period::Periodic(1)));
            for c in scan.cells_at(e) {
                assert!((c.samples.last().unwrap() - 0.5).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn above_threshold_leaves_fixed_point() {
        // The flip at η = 2/ℓ₁''(0.5) = 3.2 is subcritical: past it the
        // orbits are not period 2 but wander over the unit interval.
        let scan = bifurcation_scan(&s1(), &[3.3], &settings(20), 1).unwrap();
        assert_eq!(scan.diverged_count(0), 0);
        let p = scan.period_at(0).unwrap();
        assert!(p.is_nontrivial(), "{p}");
        for c in scan.cells_at(0) {
            assert!(c.samples.iter().any(|&w| w < 0.5) && c.samples.iter().any(|&w| w > 0.5));
        }
    }

    #[test]
    fn unbounded_domain_diverges_past_threshold() {
        let st = ScanSettings {
            domain: WeightDomain::Unbounded,
            ..settings(10)
        };
        let scan = bifurcation_scan(&s1(), &[3.3], &st, 1).unwrap();
        assert_eq!(scan.diverged_count(0), 10);
        assert_eq!(scan.period_at(0), None);
    }

    #[test]
    fn scan_matches_orbit_machinery() {
        let q = s1();
        let st = ScanSettings {
            runup: 10,
            keep_k: 30,
            ..settings(3)
        };
        let scan = bifurcation_scan(&q, &[3.4], &st, 9).unwrap();
        let cfg = OptimizerConfig::gd(3.4, 1).with_domain(WeightDomain::unit_interval());
        for c in scan.cells_at(0) {
            let mut rng = RngStream::new(0, 0);
            let rec = run_orbit(&vec![c.w0].into(), &q, &[Sample::empty()], &cfg, &Schedule::new(10, 30), &[Observable::Weight(0)], &mut rng).unwrap();
            assert_eq!(rec.series("w0").unwrap(), c.samples.as_slice());
        }
    }

    #[test]
    fn rejects_unsorted_grid() {
        assert!(bifurcation_scan(&s1(), &[2.0, 1.0], &settings(2), 0).is_err());
    }
}
