use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::partition::LossPartition;
use crate::{Error, Result};

pub const SURROGATE_LABEL: &str = "markov surrogate (loss process is not Markovian)";

/// Row-stochastic Ulam matrix with the counts it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub label: String,
    pub matrix: DMatrix<f64>,
    pub counts: DMatrix<u64>,
    pub smoothing: f64,
    pub transitions: usize,
    /// Rows without observed transitions, filled uniformly.
    pub empty_rows: Vec<usize>,
    /// Samples clamped into a boundary bin.
    pub clamped: usize,
    /// Original bin index of each row (identity unless restricted).
    pub states: Vec<usize>,
}

pub fn ulam_transition(
    series: &[f64],
    runup: usize,
    partition: &LossPartition,
    smoothing: f64,
) -> Result<TransitionMatrix> {
    let k = partition.bins();
    if k < 2 {
        return Err(Error::param("partition needs at least 2 bins"));
    }
    if !(smoothing >= 0.0) {
        return Err(Error::param("smoothing must be non-negative"));
    }
    let window = series.get(runup..).unwrap_or(&[]);
    if window.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 post-runup values, got {}",
            window.len()
        )));
    }
    let mut clamped = 0;
    let bins: Vec<usize> = window
        .iter()
        .map(|&v| {
            let (b, c) = partition.bin(v);
            clamped += c as usize;
            b
        })
        .collect();
    let mut counts = DMatrix::<u64>::zeros(k, k);
    for w in bins.windows(2) {
        counts[(w[0], w[1])] += 1;
    }
    let mut tm = TransitionMatrix::from_counts(counts, smoothing);
    tm.clamped = clamped;
    Ok(tm)
}

impl TransitionMatrix {
    pub fn from_counts(counts: DMatrix<u64>, smoothing: f64) -> Self {
        let k = counts.nrows();
        let mut matrix = DMatrix::zeros(k, k);
        let mut empty_rows = Vec::new();
        for i in 0..k {
            let total: u64 = counts.row(i).iter().sum();
            let denom = total as f64 + smoothing * k as f64;
            if total == 0 {
                empty_rows.push(i);
            }
            if denom == 0.0 {
                matrix.row_mut(i).fill(1.0 / k as f64);
            } else {
                for j in 0..k {
                    matrix[(i, j)] = (counts[(i, j)] as f64 + smoothing) / denom;
                }
            }
        }
        Self {
            label: SURROGATE_LABEL.to_string(),
            transitions: counts.iter().sum::<u64>() as usize,
            matrix,
            counts,
            smoothing,
            empty_rows,
            clamped: 0,
            states: (0..k).collect(),
        }
    }

    /// Wraps an exact stochastic matrix (no counts).
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        super::spectral::check_stochastic(&matrix)?;
        let k = matrix.nrows();
        Ok(Self {
            label: "exact".to_string(),
            counts: DMatrix::zeros(k, k),
            matrix,
            smoothing: 0.0,
            transitions: 0,
            empty_rows: Vec::new(),
            clamped: 0,
            states: (0..k).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Chain restricted to bins with observed outgoing transitions;
    /// transitions into dropped bins are discarded and rows renormalised.
    /// Unvisited bins otherwise contribute uniform rows whose eigenvalues
    /// have nothing to do with the dynamics.
    pub fn restricted_to_visited(&self) -> Self {
        let keep: Vec<usize> = (0..self.counts.nrows())
            .filter(|&i| self.counts.row(i).iter().any(|&c| c > 0))
            .collect();
        if keep.len() == self.counts.nrows() || keep.is_empty() {
            return self.clone();
        }
        let counts = DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.counts[(keep[i], keep[j])]);
        let mut out = Self::from_counts(counts, self.smoothing);
        out.label = self.label.clone();
        out.clamped = self.clamped;
        out.states = keep.iter().map(|&i| self.states[i]).collect();
        out
    }
}
