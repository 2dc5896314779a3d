//! Learning algorithms as (possibly random) dynamical systems on weight
//! space: the update map, batch draws, orbits and orbit ensembles.

use std::ops::{Deref, DerefMut};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::landscapes::{Landscape, Sample};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for WeightVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Gd,
    Sgd,
}

/// Region the weights live in. `Periodic` wraps every coordinate into
/// `[lo, hi)` after each update, turning a map on the reals into a map of
/// an interval (used for the one-dimensional bifurcation scans).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WeightDomain {
    #[default]
    Unbounded,
    Periodic { lo: f64, hi: f64 },
}

impl WeightDomain {
    pub fn unit_interval() -> Self {
        WeightDomain::Periodic { lo: 0.0, hi: 1.0 }
    }

    #[inline]
    pub fn wrap(&self, v: f64) -> f64 {
        match *self {
            WeightDomain::Unbounded => v,
            WeightDomain::Periodic { lo, hi } => {
                let span = hi - lo;
                let r = lo + (v - lo).rem_euclid(span);
                // rem_euclid can round up to exactly `span`
                if r >= hi {
                    lo
                } else {
                    r
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub eta: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub mode: Mode,
    pub divergence_radius: f64,
    #[serde(default)]
    pub domain: WeightDomain,
}

impl OptimizerConfig {
    pub fn gd(eta: f64, n: usize) -> Self {
        Self {
            eta,
            momentum: 0.0,
            batch_size: n,
            mode: Mode::Gd,
            divergence_radius: 1e6,
            domain: WeightDomain::Unbounded,
        }
    }

    pub fn sgd(eta: f64, batch_size: usize) -> Self {
        Self {
            mode: Mode::Sgd,
            batch_size,
            ..Self::gd(eta, batch_size)
        }
    }

    pub fn with_momentum(mut self, momentum: f64) -> Self {
        self.momentum = momentum;
        self
    }

    pub fn with_domain(mut self, domain: WeightDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_divergence_radius(mut self, r: f64) -> Self {
        self.divergence_radius = r;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::param(format!("eta must be finite and non-negative, got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::param(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if !(self.divergence_radius > 0.0) {
            return Err(Error::param("divergence_radius must be positive"));
        }
        if self.batch_size < 1 || self.batch_size > n {
            return Err(Error::param(format!(
                "batch size {} outside 1..={n}",
                self.batch_size
            )));
        }
        if self.mode == Mode::Gd && self.batch_size != n {
            return Err(Error::param(format!(
                "GD requires batch_size = n = {n}, got {}",
                self.batch_size
            )));
        }
        if let WeightDomain::Periodic { lo, hi } = self.domain {
            if !(hi > lo) {
                return Err(Error::param("periodic domain needs hi > lo"));
            }
        }
        Ok(())
    }
}

/// Indices (0-based, ascending) of the samples in one mini-batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchDraw {
    pub indices: Vec<usize>,
}

impl BatchDraw {
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }
}

/// Uniform `m`-subset of `{0, …, n−1}`, sorted so that gradient sums run in
/// index order (which makes `m = n` reproduce GD bit for bit).
pub fn draw_batch(n: usize, m: usize, rng: &mut RngStream) -> Result<BatchDraw> {
    if m < 1 || m > n {
        return Err(Error::param(format!("batch size {m} outside 1..={n}")));
    }
    if m == n {
        return Ok(BatchDraw::full(n));
    }
    let mut indices = rand::seq::index::sample(rng, n, m).into_vec();
    indices.sort_unstable();
    Ok(BatchDraw { indices })
}

/// One heavy-ball step: `v' = μ v − η ĝ`, `w' = w + v'`, where `ĝ` is the
/// batch-mean gradient. With `μ = 0` this is plain (S)GD.
pub fn step<L: Landscape + ?Sized>(
    w: &WeightVector,
    velocity: &WeightVector,
    landscape: &L,
    trainset: &[Sample],
    config: &OptimizerConfig,
    batch: &BatchDraw,
) -> Result<(WeightVector, WeightVector)> {
    let d = landscape.dim();
    for (len, ctx) in [(w.len(), "weights"), (velocity.len(), "velocity")] {
        if len != d {
            return Err(Error::Dimension {
                expected: d,
                got: len,
                context: ctx,
            });
        }
    }
    if batch.indices.is_empty() || batch.indices.iter().any(|&i| i >= trainset.len()) {
        return Err(Error::param("batch indices out of range"));
    }
    let mut w2 = w.clone();
    let mut v2 = velocity.clone();
    let mut stepper = Stepper::new(d);
    stepper.advance(&mut w2, &mut v2, landscape, trainset, config, &batch.indices);
    check_state(&w2, config, 1)?;
    Ok((w2, v2))
}

fn check_state(w: &[f64], config: &OptimizerConfig, step: usize) -> Result<()> {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || norm > config.divergence_radius {
        return Err(Error::Divergence { step, norm });
    }
    Ok(())
}

/// Scratch buffers for in-place steps.
struct Stepper {
    grad: Vec<f64>,
    acc: Vec<f64>,
}

impl Stepper {
    fn new(d: usize) -> Self {
        Self {
            grad: vec![0.0; d],
            acc: vec![0.0; d],
        }
    }

    fn advance<L: Landscape + ?Sized>(
        &mut self,
        w: &mut [f64],
        v: &mut [f64],
        landscape: &L,
        trainset: &[Sample],
        config: &OptimizerConfig,
        batch: &[usize],
    ) {
        self.acc.iter_mut().for_each(|a| *a = 0.0);
        for &i in batch {
            landscape.grad(&trainset[i], w, &mut self.grad);
            for (a, g) in self.acc.iter_mut().zip(&self.grad) {
                *a += g;
            }
        }
        let m = batch.len() as f64;
        for ((wi, vi), a) in w.iter_mut().zip(v.iter_mut()).zip(&self.acc) {
            *vi = config.momentum * *vi - config.eta * (a / m);
            *wi = config.domain.wrap(*wi + *vi);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Discarded transient steps.
    pub runup: usize,
    /// Recorded steps.
    pub length: usize,
    /// Keep every `stride`-th post-runup weight vector; 0 keeps none.
    pub stride: usize,
}

impl Schedule {
    pub fn new(runup: usize, length: usize) -> Self {
        Self {
            runup,
            length,
            stride: 0,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }
}

/// A scalar functional of the current weights, recorded once per step.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Coordinate `i` of the weight vector; named `w{i}`.
    Weight(usize),
    /// Mean loss over the training set; named `train_loss`.
    TrainLoss,
    /// Mean loss over an arbitrary sample set (e.g. a test set).
    MeanLoss { name: String, samples: Vec<Sample> },
    /// Mean 0-1 error over a sample set.
    MeanError { name: String, samples: Vec<Sample> },
    /// One series per sample, named `{prefix}{index}` (zero-padded).
    PerSampleLoss { prefix: String, samples: Vec<Sample> },
    /// One 0-1 error series per sample, named like [`Observable::PerSampleLoss`].
    PerSampleError { prefix: String, samples: Vec<Sample> },
}

impl Observable {
    /// Series names this observable contributes to an [`OrbitRecord`].
    pub fn names(&self) -> Vec<String> {
        match self {
            Observable::Weight(i) => vec![format!("w{i}")],
            Observable::TrainLoss => vec!["train_loss".into()],
            Observable::MeanLoss { name, .. } | Observable::MeanError { name, .. } => {
                vec![name.clone()]
            }
            Observable::PerSampleLoss { prefix, samples }
            | Observable::PerSampleError { prefix, samples } => {
                let width = samples.len().saturating_sub(1).to_string().len();
                (0..samples.len())
                    .map(|i| format!("{prefix}{i:0width$}"))
                    .collect()
            }
        }
    }

    fn evaluate<L: Landscape + ?Sized>(
        &self,
        landscape: &L,
        trainset: &[Sample],
        w: &[f64],
        out: &mut Vec<f64>,
    ) {
        match self {
            Observable::Weight(i) => out.push(w[*i]),
            Observable::TrainLoss => out.push(crate::landscapes::mean_loss(landscape, trainset, w)),
            Observable::MeanLoss { samples, .. } => {
                out.push(crate::landscapes::mean_loss(landscape, samples, w))
            }
            Observable::MeanError { samples, .. } => {
                let s: f64 = samples
                    .iter()
                    .map(|z| landscape.zero_one(z, w).unwrap_or(f64::NAN))
                    .sum();
                out.push(s / samples.len().max(1) as f64)
            }
            Observable::PerSampleLoss { samples, .. } => {
                out.extend(samples.iter().map(|z| landscape.loss(z, w)))
            }
            Observable::PerSampleError { samples, .. } => out.extend(
                samples
                    .iter()
                    .map(|z| landscape.zero_one(z, w).unwrap_or(f64::NAN)),
            ),
        }
    }

    fn validate<L: Landscape + ?Sized>(&self, landscape: &L) -> Result<()> {
        let check = |samples: &[Sample]| -> Result<()> {
            if let Some(d) = landscape.input_dim() {
                if let Some(z) = samples.iter().find(|z| z.x.len() != d) {
                    return Err(Error::Dimension {
                        expected: d,
                        got: z.x.len(),
                        context: "observable sample input",
                    });
                }
            }
            Ok(())
        };
        match self {
            Observable::Weight(i) if *i >= landscape.dim() => {
                Err(Error::param(format!("weight index {i} out of range")))
            }
            Observable::MeanError { samples, .. } | Observable::PerSampleError { samples, .. } => {
                if let Some(z) = samples.first() {
                    let w = vec![0.0; landscape.dim()];
                    if landscape.zero_one(z, &w).is_none() {
                        return Err(Error::param("landscape does not define a 0-1 error"));
                    }
                }
                check(samples)
            }
            Observable::MeanLoss { samples, .. } | Observable::PerSampleLoss { samples, .. } => {
                check(samples)
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub runup: usize,
    pub length: usize,
    pub stride: usize,
    pub weight_snapshots: Vec<WeightVector>,
    pub observable_series: IndexMap<String, Vec<f64>>,
    /// Step (1-based, counting the runup) at which the orbit was aborted.
    pub diverged_at: Option<usize>,
}

impl OrbitRecord {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observable_series.get(name).map(Vec::as_slice)
    }

    /// Recorded entries per series.
    pub fn recorded(&self) -> usize {
        self.observable_series.values().next().map_or(0, Vec::len)
    }
}

/// Iterates the update map for `runup + length` steps from `w0`, recording
/// observables after the runup. Divergence truncates every series at the
/// same step and sets `diverged_at` instead of returning an error.
#[allow(clippy::too_many_arguments)]
pub fn run_orbit<L: Landscape + ?Sized>(
    w0: &WeightVector,
    landscape: &L,
    trainset: &[Sample],
    config: &OptimizerConfig,
    schedule: &Schedule,
    observables: &[Observable],
    rng: &mut RngStream,
) -> Result<OrbitRecord> {
    let d = landscape.dim();
    if w0.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: w0.len(),
            context: "initial weights",
        });
    }
    if trainset.is_empty() {
        return Err(Error::param("training set is empty"));
    }
    config.validate(trainset.len())?;
    if let Some(di) = landscape.input_dim() {
        if let Some(z) = trainset.iter().find(|z| z.x.len() != di) {
            return Err(Error::Dimension {
                expected: di,
                got: z.x.len(),
                context: "training sample input",
            });
        }
    }
    for o in observables {
        o.validate(landscape)?;
    }

    let names: Vec<String> = observables.iter().flat_map(Observable::names).collect();
    let mut columns: Vec<Vec<f64>> = names.iter().map(|_| Vec::with_capacity(schedule.length)).collect();
    let mut snapshots = Vec::new();
    let mut diverged_at = None;

    let n = trainset.len();
    let full: Vec<usize> = (0..n).collect();
    let mut w: Vec<f64> = w0.0.iter().map(|&v| config.domain.wrap(v)).collect();
    let mut v = vec![0.0; d];
    let mut stepper = Stepper::new(d);
    let mut row = Vec::with_capacity(names.len());

    for t in 1..=schedule.runup + schedule.length {
        let batch;
        let indices: &[usize] = match config.mode {
            Mode::Gd => &full,
            Mode::Sgd => {
                batch = draw_batch(n, config.batch_size, rng)?;
                &batch.indices
            }
        };
        stepper.advance(&mut w, &mut v, landscape, trainset, config, indices);
        if check_state(&w, config, t).is_err() {
            diverged_at = Some(t);
            break;
        }
        if t > schedule.runup {
            row.clear();
            for o in observables {
                o.evaluate(landscape, trainset, &w, &mut row);
            }
            for (col, &x) in columns.iter_mut().zip(&row) {
                col.push(x);
            }
            let k = t - schedule.runup;
            if schedule.stride > 0 && k.is_multiple_of(schedule.stride) {
                snapshots.push(WeightVector(w.clone()));
            }
        }
    }

    Ok(OrbitRecord {
        runup: schedule.runup,
        length: schedule.length,
        stride: schedule.stride,
        weight_snapshots: snapshots,
        observable_series: names.into_iter().zip(columns).collect(),
        diverged_at,
    })
}

/// Runs one orbit per initial condition; orbit `i` draws from
/// `RngStream::new(master_seed, i)`. Output order matches `inits` and is
/// independent of `workers`.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble<L: Landscape + ?Sized>(
    inits: &[WeightVector],
    landscape: &L,
    trainset: &[Sample],
    config: &OptimizerConfig,
    schedule: &Schedule,
    observables: &[Observable],
    master_seed: u64,
    workers: usize,
) -> Result<Vec<OrbitRecord>> {
    if inits.is_empty() {
        return Err(Error::param("ensemble needs at least one initial condition"));
    }
    let job = || {
        inits
            .par_iter()
            .enumerate()
            .map(|(i, w0)| {
                let mut rng = RngStream::new(master_seed, i as u64);
                run_orbit(w0, landscape, trainset, config, schedule, observables, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    };
    with_workers(workers, job)
}

/// Runs `job` on a dedicated pool with `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return job();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{LeastSquares, QuadraticMapLoss};

    /// `ℓ(w) = w²/2` via least squares with x = 1, y = 0.
    fn half_square() -> (LeastSquares, Vec<Sample>) {
        (LeastSquares::new(1), vec![Sample::new(vec![1.0], 0.0)])
    }

    #[test]
    fn quadratic_step() {
        let (ls, data) = half_square();
        let cfg = OptimizerConfig::gd(0.5, 1);
        let (w, _) = step(&vec![1.0].into(), &WeightVector::zeros(1), &ls, &data, &cfg, &BatchDraw::full(1)).unwrap();
        assert_eq!(w.0, vec![0.5]);
    }

    #[test]
    fn critical_point_is_fixed() {
        let q = QuadraticMapLoss::new(3.0).unwrap();
        let data = vec![Sample::empty()];
        let cfg = OptimizerConfig::gd(0.7, 1);
        let (w, _) = step(&vec![0.5].into(), &WeightVector::zeros(1), &q, &data, &cfg, &BatchDraw::full(1)).unwrap();
        assert_eq!(w.0, vec![0.5]);
    }

    #[test]
    fn zero_learning_rate_decays_velocity() {
        let (ls, data) = half_square();
        let cfg = OptimizerConfig::gd(0.0, 1).with_momentum(0.9);
        let (w, v) = step(&vec![1.0].into(), &vec![2.0].into(), &ls, &data, &cfg, &BatchDraw::full(1)).unwrap();
        assert_eq!(v.0, vec![0.9 * 2.0]);
        assert_eq!(w.0, vec![1.0 + 0.9 * 2.0]);
    }

    #[test]
    fn step_reports_divergence() {
        let (ls, data) = half_square();
        let cfg = OptimizerConfig::gd(1e9, 1);
        let r = step(&vec![1.0].into(), &WeightVector::zeros(1), &ls, &data, &cfg, &BatchDraw::full(1));
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }

    #[test]
    fn draw_batch_full_and_errors() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(draw_batch(6, 6, &mut rng).unwrap(), BatchDraw::full(6));
        assert!(draw_batch(3, 4, &mut rng).is_err());
        assert!(draw_batch(3, 0, &mut rng).is_err());
        let b = draw_batch(20, 5, &mut rng).unwrap();
        assert_eq!(b.indices.len(), 5);
        assert!(b.indices.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn orbit_on_quadratic() {
        let (ls, data) = half_square();
        let cfg = OptimizerConfig::gd(0.5, 1);
        let mut rng = RngStream::new(0, 0);
        let rec = run_orbit(&vec![1.0].into(), &ls, &data, &cfg, &Schedule::new(0, 3), &[Observable::Weight(0)], &mut rng).unwrap();
        assert_eq!(rec.series("w0").unwrap(), &[0.5, 0.25, 0.125]);
        assert!(!rec.diverged());
    }

    #[test]
    fn empty_orbit() {
        let (ls, data) = half_square();
        let cfg = OptimizerConfig::gd(0.5, 1);
        let mut rng = RngStream::new(0, 0);
        let rec = run_orbit(&vec![1.0].into(), &ls, &data, &cfg, &Schedule::new(5, 0), &[Observable::Weight(0), Observable::TrainLoss], &mut rng).unwrap();
        assert_eq!(rec.recorded(), 0);
        assert_eq!(rec.observable_series.len(), 2);
    }

    #[test]
    fn huge_step_diverges_on_first_step() {
        // |ℓ'(0)| = s³ = 1 for s = 1, so w1 = η exits a radius below η.
        let q = QuadraticMapLoss::new(1.0).unwrap();
        let cfg = OptimizerConfig::gd(1e3, 1).with_divergence_radius(10.0);
        let mut rng = RngStream::new(0, 0);
        let rec = run_orbit(&vec![0.0].into(), &q, &[Sample::empty()], &cfg, &Schedule::new(0, 10), &[Observable::Weight(0), Observable::TrainLoss], &mut rng).unwrap();
        assert_eq!(rec.diverged_at, Some(1));
        assert!(rec.observable_series.values().all(|s| s.is_empty()));
    }

    #[test]
    fn snapshots_follow_stride() {
        let (ls, data) = half_square();
        let cfg = OptimizerConfig::gd(0.1, 1);
        let mut rng = RngStream::new(0, 0);
        let rec = run_orbit(&vec![1.0].into(), &ls, &data, &cfg, &Schedule::new(2, 10).with_stride(3), &[Observable::Weight(0)], &mut rng).unwrap();
        assert_eq!(rec.weight_snapshots.len(), 3);
        assert_eq!(rec.weight_snapshots[0].0[0], rec.series("w0").unwrap()[2]);
    }

    #[test]
    fn periodic_domain_wraps() {
        let d = WeightDomain::unit_interval();
        assert_eq!(d.wrap(1.25), 0.25);
        assert_eq!(d.wrap(-0.25), 0.75);
        assert_eq!(d.wrap(-1e-18), 0.0);
        assert!(d.wrap(-1e-17) < 1.0);
    }

    #[test]
    fn rejects_gd_with_partial_batch() {
        let mut cfg = OptimizerConfig::gd(0.1, 4);
        cfg.batch_size = 2;
        assert!(cfg.validate(4).is_err());
        assert!(OptimizerConfig::sgd(0.1, 2).with_momentum(1.0).validate(4).is_err());
    }
}
