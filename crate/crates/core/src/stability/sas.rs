use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PerturbedPair;
use crate::dynamics::{run_orbit, with_workers, Observable, OptimizerConfig, OrbitRecord, Schedule};
use crate::landscapes::{Landscape, Sample};
use crate::{Error, Result, RngStream, WeightVector};

const SAS_TAG: u64 = 0x5A5;
const PROBE_PREFIX: &str = "probe";

/// Which per-probe statistic is compared between `S` and `S′`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    Loss,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SasProtocol {
    pub runup: usize,
    pub window: usize,
    pub inits_per_side: usize,
    pub statistic: Statistic,
}

impl Default for SasProtocol {
    fn default() -> Self {
        Self {
            runup: 200,
            window: 1200,
            inits_per_side: 1,
            statistic: Statistic::Loss,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair_id: usize,
    pub index: usize,
    /// `|⟨ℓ_z⟩_S − ⟨ℓ_z⟩_S′|` per probe; empty when the pair diverged.
    pub diffs: Vec<f64>,
    pub base_averages: Vec<f64>,
    pub perturbed_averages: Vec<f64>,
    pub mean: Option<f64>,
    /// Standard error of the mean over probes.
    pub sem: Option<f64>,
    pub diverged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub protocol: SasProtocol,
    pub pairs: usize,
    pub probes: usize,
    pub valid_pairs: usize,
    pub results: Vec<PairResult>,
    /// Maximum recorded difference over valid pairs and probes; a lower
    /// bound on the stability coefficient. `None` if every pair diverged.
    pub beta_hat: Option<f64>,
}

impl StabilityReport {
    pub fn diverged_pairs(&self) -> usize {
        self.pairs - self.valid_pairs
    }
}

/// Time averages of the per-sample series `{prefix}{i}` for `i < count`.
pub fn loss_statistics(record: &OrbitRecord, prefix: &str, count: usize) -> Result<Vec<f64>> {
    let probe = Observable::PerSampleLoss {
        prefix: prefix.to_string(),
        samples: vec![Sample::empty(); count],
    };
    probe
        .names()
        .iter()
        .map(|name| {
            let s = record
                .series(name)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::MissingStatistic(name.clone()))?;
            Ok(s.iter().sum::<f64>() / s.len() as f64)
        })
        .collect()
}

/// Estimates `β̂` from orbits on each side of every pair. Both sides of a
/// pair start from the same weights and replay the same batch stream, so
/// the differences isolate the data perturbation.
#[allow(clippy::too_many_arguments)]
pub fn sas_lower_bound<L: Landscape + ?Sized>(
    landscape: &L,
    pairs: &[PerturbedPair],
    probes: &[Sample],
    config: &OptimizerConfig,
    protocol: &SasProtocol,
    master_seed: u64,
    workers: usize,
) -> Result<StabilityReport> {
    if probes.is_empty() {
        return Err(Error::param("probe set is empty"));
    }
    if protocol.window == 0 {
        return Err(Error::param("window must be positive"));
    }
    if protocol.inits_per_side == 0 {
        return Err(Error::param("need at least one initialization per side"));
    }
    let observable = match protocol.statistic {
        Statistic::Loss => Observable::PerSampleLoss {
            prefix: PROBE_PREFIX.into(),
            samples: probes.to_vec(),
        },
        Statistic::Error => Observable::PerSampleError {
            prefix: PROBE_PREFIX.into(),
            samples: probes.to_vec(),
        },
    };
    let schedule = Schedule::new(protocol.runup, protocol.window);
    let observables = [observable];

    let job = || {
        pairs
            .par_iter()
            .enumerate()
            .map(|(p, pair)| {
                run_pair(landscape, p, pair, probes.len(), config, &schedule, &observables, protocol, master_seed)
            })
            .collect::<Result<Vec<_>>>()
    };
    let results = with_workers(workers, job)?;

    let valid: Vec<&PairResult> = results.iter().filter(|r| !r.diverged).collect();
    let beta_hat = valid
        .iter()
        .flat_map(|r| r.diffs.iter().copied())
        .reduce(f64::max);
    Ok(StabilityReport {
        protocol: protocol.clone(),
        pairs: pairs.len(),
        probes: probes.len(),
        valid_pairs: valid.len(),
        beta_hat,
        results,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_pair<L: Landscape + ?Sized>(
    landscape: &L,
    pair_id: usize,
    pair: &PerturbedPair,
    n_probes: usize,
    config: &OptimizerConfig,
    schedule: &Schedule,
    observables: &[Observable],
    protocol: &SasProtocol,
    master_seed: u64,
) -> Result<PairResult> {
    let mut base = vec![0.0; n_probes];
    let mut perturbed = vec![0.0; n_probes];
    let mut diverged = false;
    for j in 0..protocol.inits_per_side {
        let path = [SAS_TAG, pair_id as u64, j as u64];
        let mut init_rng = RngStream::derived(master_seed, &[path[0], path[1], path[2], 0]);
        let w0 = WeightVector(landscape.initial_weights(&mut init_rng));
        let batch_rng = RngStream::derived(master_seed, &[path[0], path[1], path[2], 1]);
        for (set, acc) in [(&pair.base, &mut base), (&pair.perturbed, &mut perturbed)] {
            let mut rng = batch_rng.clone();
            let rec = run_orbit(&w0, landscape, set, config, schedule, observables, &mut rng)?;
            if rec.diverged() {
                diverged = true;
                break;
            }
            for (a, v) in acc.iter_mut().zip(loss_statistics(&rec, PROBE_PREFIX, n_probes)?) {
                *a += v;
            }
        }
        if diverged {
            break;
        }
    }
    if diverged {
        return Ok(PairResult {
            pair_id,
            index: pair.index,
            diffs: Vec::new(),
            base_averages: Vec::new(),
            perturbed_averages: Vec::new(),
            mean: None,
            sem: None,
            diverged: true,
        });
    }
    let k = protocol.inits_per_side as f64;
    base.iter_mut().chain(perturbed.iter_mut()).for_each(|v| *v /= k);
    let diffs: Vec<f64> = base.iter().zip(&perturbed).map(|(a, b)| (a - b).abs()).collect();
    let (mean, sem) = mean_sem(&diffs);
    Ok(PairResult {
        pair_id,
        index: pair.index,
        diffs,
        base_averages: base,
        perturbed_averages: perturbed,
        mean: Some(mean),
        sem: Some(sem),
        diverged: false,
    })
}

fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{make_dataset, LeastSquares, Teacher, TeacherKind, ToyNet, Activation, LossKind};
    use crate::stability::stochastic_perturbation;

    fn regression_pair() -> PerturbedPair {
        PerturbedPair::new(vec![Sample::new(vec![1.0], 1.0)], 0, Sample::new(vec![1.0], 2.0)).unwrap()
    }

    fn converge() -> SasProtocol {
        SasProtocol {
            runup: 200,
            window: 50,
            ..SasProtocol::default()
        }
    }

    #[test]
    fn one_dimensional_regression() {
        let ls = LeastSquares::new(1);
        let probe = [Sample::new(vec![1.0], 0.0)];
        let cfg = OptimizerConfig::gd(0.5, 1);
        let r = sas_lower_bound(&ls, &[regression_pair()], &probe, &cfg, &converge(), 0, 1).unwrap();
        assert!((r.beta_hat.unwrap() - 1.5).abs() < 1e-12);
        assert!((r.results[0].base_averages[0] - 0.5).abs() < 1e-12);
        assert!((r.results[0].perturbed_averages[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_is_exactly_zero() {
        let t = Teacher::random(TeacherKind::Logistic { temperature: 0.0 }, 3, 2);
        let ds = make_dataset(16, 3, 0.25, t, 5).unwrap();
        let net = ToyNet::new(3, 4, Activation::Tanh, LossKind::Logistic);
        let pair = PerturbedPair::identical(ds.samples.clone()).unwrap();
        let probes = ds.fresh_samples(5, &mut RngStream::new(1, 1));
        for cfg in [OptimizerConfig::gd(0.1, 16), OptimizerConfig::sgd(0.1, 4).with_momentum(0.5)] {
            let proto = SasProtocol { runup: 20, window: 30, inits_per_side: 2, ..Default::default() };
            let r = sas_lower_bound(&net, std::slice::from_ref(&pair), &probes, &cfg, &proto, 9, 1).unwrap();
            assert_eq!(r.beta_hat, Some(0.0));
        }
    }

    #[test]
    fn swap_symmetry_and_worker_independence() {
        let t = Teacher::random(TeacherKind::Logistic { temperature: 0.0 }, 3, 2);
        let ds = make_dataset(16, 3, 0.25, t, 5).unwrap();
        let net = ToyNet::new(3, 4, Activation::Tanh, LossKind::Logistic);
        let mut rng = RngStream::new(4, 4);
        let pairs: Vec<_> = (0..3)
            .map(|k| stochastic_perturbation(&ds, k, &mut rng).unwrap())
            .collect();
        let swapped: Vec<_> = pairs.iter().map(PerturbedPair::swapped).collect();
        let probes = ds.fresh_samples(4, &mut rng);
        let cfg = OptimizerConfig::sgd(0.1, 4);
        let proto = SasProtocol { runup: 10, window: 40, ..Default::default() };
        let a = sas_lower_bound(&net, &pairs, &probes, &cfg, &proto, 3, 1).unwrap();
        let b = sas_lower_bound(&net, &swapped, &probes, &cfg, &proto, 3, 4).unwrap();
        let c = sas_lower_bound(&net, &pairs, &probes, &cfg, &proto, 3, 4).unwrap();
        assert_eq!(a, c);
        for (x, y) in a.results.iter().zip(&b.results) {
            assert_eq!(x.diffs, y.diffs);
        }
        assert!(a.beta_hat.unwrap() > 0.0);
        let max = a.results.iter().flat_map(|r| r.diffs.clone()).fold(0.0, f64::max);
        assert_eq!(a.beta_hat, Some(max));
    }

    #[test]
    fn divergence_flags_the_pair() {
        let ls = LeastSquares::new(1);
        let cfg = OptimizerConfig::gd(3.0, 1).with_divergence_radius(1e6);
        let probe = [Sample::new(vec![1.0], 0.0)];
        let r = sas_lower_bound(&ls, &[regression_pair()], &probe, &cfg, &converge(), 0, 1).unwrap();
        assert!(r.results[0].diverged);
        assert_eq!(r.beta_hat, None);
        assert_eq!(r.diverged_pairs(), 1);
    }

    #[test]
    fn rejects_empty_probes() {
        let ls = LeastSquares::new(1);
        let cfg = OptimizerConfig::gd(0.5, 1);
        assert!(sas_lower_bound(&ls, &[regression_pair()], &[], &cfg, &converge(), 0, 1).is_err());
    }

    #[test]
    fn missing_statistic() {
        let rec = OrbitRecord {
            runup: 0,
            length: 0,
            stride: 0,
            weight_snapshots: vec![],
            observable_series: Default::default(),
            diverged_at: None,
        };
        assert!(matches!(loss_statistics(&rec, "probe", 2), Err(Error::MissingStatistic(_))));
    }
}
