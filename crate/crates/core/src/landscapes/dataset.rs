//! Seeded synthetic datasets with label corruption.
//!
//! Inputs are standard Gaussian. Clean labels come from a teacher (linear
//! with additive noise for regression, logistic for binary classification);
//! each label is then independently corrupted with probability `p`.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::rng::RngStream;
use crate::{Error, Result};

const DATASET_STREAM: u64 = 0xDA7A;
const TEACHER_STREAM: u64 = 0x7EAC;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TeacherKind {
    /// `y = wᵀx + b + N(0, noise_std²)`; corrupted labels are redrawn from
    /// the label marginal `N(0, ‖w‖² + b² + noise_std²)`.
    Linear { noise_std: f64 },
    /// `P(y = +1) = σ((wᵀx + b)/temperature)`, deterministic sign at
    /// temperature 0; corrupted labels are flipped.
    Logistic { temperature: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Teacher {
    pub kind: TeacherKind,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Teacher {
    /// Teacher with unit-norm Gaussian direction drawn from `seed`.
    pub fn random(kind: TeacherKind, d: usize, seed: u64) -> Self {
        let mut rng = RngStream::new(seed, TEACHER_STREAM);
        let mut w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        w.iter_mut().for_each(|v| *v /= norm);
        Self {
            kind,
            weights: w,
            bias: 0.0,
        }
    }

    fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.kind, TeacherKind::Logistic { .. })
    }

    pub fn clean_label(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        let m = self.margin(x);
        match self.kind {
            TeacherKind::Linear { noise_std } => {
                let e: f64 = StandardNormal.sample(rng);
                m + noise_std * e
            }
            TeacherKind::Logistic { temperature } => {
                if temperature <= 0.0 {
                    if m >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    let prob = 1.0 / (1.0 + (-m / temperature).exp());
                    if rng.random::<f64>() < prob {
                        1.0
                    } else {
                        -1.0
                    }
                }
            }
        }
    }

    fn corrupt(&self, y: f64, rng: &mut RngStream) -> f64 {
        match self.kind {
            TeacherKind::Linear { noise_std } => {
                let var = self.weights.iter().map(|v| v * v).sum::<f64>()
                    + self.bias * self.bias
                    + noise_std * noise_std;
                Normal::new(0.0, var.sqrt()).unwrap().sample(rng)
            }
            TeacherKind::Logistic { .. } => -y,
        }
    }

    /// Draws one point `(x, y)`; returns the sample, its clean label and
    /// whether the label was corrupted.
    pub fn draw(&self, d: usize, p: f64, rng: &mut RngStream) -> (Sample, f64, bool) {
        let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let clean = self.clean_label(&x, rng);
        let corrupted = rng.random::<f64>() < p;
        let y = if corrupted { self.corrupt(clean, rng) } else { clean };
        (Sample::new(x, y), clean, corrupted)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub teacher: Teacher,
    pub samples: Vec<Sample>,
    pub clean_labels: Vec<f64>,
    pub corrupted: Vec<bool>,
}

pub fn make_dataset(n: usize, d: usize, p: f64, teacher: Teacher, seed: u64) -> Result<SyntheticDataset> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::param(format!("corruption probability must lie in [0, 0.5], got {p}")));
    }
    if teacher.weights.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: teacher.weights.len(),
            context: "teacher weights vs input dimension",
        });
    }
    let mut rng = RngStream::new(seed, DATASET_STREAM);
    let mut samples = Vec::with_capacity(n);
    let mut clean_labels = Vec::with_capacity(n);
    let mut corrupted = Vec::with_capacity(n);
    for _ in 0..n {
        let (z, c, k) = teacher.draw(d, p, &mut rng);
        samples.push(z);
        clean_labels.push(c);
        corrupted.push(k);
    }
    Ok(SyntheticDataset {
        n,
        d,
        p,
        seed,
        teacher,
        samples,
        clean_labels,
        corrupted,
    })
}

impl SyntheticDataset {
    /// A fresh draw from the same (corrupted) distribution.
    pub fn resample_point(&self, rng: &mut RngStream) -> Sample {
        self.teacher.draw(self.d, self.p, rng).0
    }

    /// `count` fresh i.i.d. draws, e.g. a held-out set.
    pub fn fresh_samples(&self, count: usize, rng: &mut RngStream) -> Vec<Sample> {
        (0..count).map(|_| self.resample_point(rng)).collect()
    }

    /// Same dataset with sample `k` replaced by `z`.
    pub fn with_replacement(&self, k: usize, z: Sample) -> Result<Self> {
        if k >= self.n {
            return Err(Error::param(format!("index {k} out of range for n = {}", self.n)));
        }
        let mut out = self.clone();
        out.samples[k] = z;
        // the replacement's provenance is unknown to the dataset
        out.clean_labels[k] = out.samples[k].y;
        out.corrupted[k] = false;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic() -> Teacher {
        Teacher::random(TeacherKind::Logistic { temperature: 0.0 }, 4, 1)
    }

    #[test]
    fn no_corruption_keeps_teacher_labels() {
        let ds = make_dataset(200, 4, 0.0, logistic(), 3).unwrap();
        assert!(ds.samples.iter().zip(&ds.clean_labels).all(|(z, c)| z.y == *c));
        assert!(ds.corrupted.iter().all(|c| !c));
    }

    #[test]
    fn half_corruption_flip_fraction() {
        let n = 10_000;
        let ds = make_dataset(n, 4, 0.5, logistic(), 9).unwrap();
        let flips = ds
            .samples
            .iter()
            .zip(&ds.clean_labels)
            .filter(|(z, c)| z.y != **c)
            .count() as f64
            / n as f64;
        assert!((flips - 0.5).abs() < 3.0 * (0.25f64 / n as f64).sqrt(), "flips = {flips}");
    }

    #[test]
    fn seeded_determinism() {
        let a = make_dataset(50, 4, 0.25, logistic(), 42).unwrap();
        let b = make_dataset(50, 4, 0.25, logistic(), 42).unwrap();
        assert_eq!(a, b);
        let c = make_dataset(50, 4, 0.25, logistic(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_corruption() {
        assert!(make_dataset(5, 4, 0.7, logistic(), 0).is_err());
    }

    #[test]
    fn linear_teacher_labels() {
        let t = Teacher::random(TeacherKind::Linear { noise_std: 0.0 }, 3, 2);
        let ds = make_dataset(20, 3, 0.0, t.clone(), 1).unwrap();
        for z in &ds.samples {
            let m: f64 = t.weights.iter().zip(&z.x).map(|(a, b)| a * b).sum();
            assert!((z.y - m).abs() < 1e-15);
        }
    }
}
