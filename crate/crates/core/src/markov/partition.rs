use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Partition of a loss interval into `K` bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossPartition {
    /// `K + 1` strictly increasing edges.
    pub edges: Vec<f64>,
}

impl LossPartition {
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::param(format!("partition needs at least 2 bins, got {bins}")));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param(format!("invalid loss interval [{lo}, {hi}]")));
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        edges[bins] = hi;
        Ok(Self { edges })
    }

    /// Uniform bins over `[min, max]` of `values`, widened by `margin`
    /// (fraction of the range) on both sides.
    pub fn from_values(values: &[f64], bins: usize, margin: f64) -> Result<Self> {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InsufficientData("no finite values to partition".into()));
        }
        let span = hi - lo;
        let pad = if span > 0.0 {
            margin * span
        } else {
            0.5 * lo.abs().max(1.0)
        };
        Self::uniform(lo - pad, hi + pad, bins)
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn lower(&self) -> f64 {
        self.edges[0]
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Bin index of `v`; the flag is set when `v` lay outside the interval
    /// and was clamped to a boundary bin.
    pub fn bin(&self, v: f64) -> (usize, bool) {
        let k = self.bins();
        if v < self.lower() {
            return (0, true);
        }
        if v >= self.upper() {
            return (k - 1, v > self.upper());
        }
        // first edge strictly greater than v
        let i = self.edges.partition_point(|&e| e <= v);
        (i.saturating_sub(1).min(k - 1), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        let p = LossPartition::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(p.bin(0.0), (0, false));
        assert_eq!(p.bin(0.25), (1, false));
        assert_eq!(p.bin(1.0), (3, false));
        assert_eq!(p.bin(1.5), (3, true));
        assert_eq!(p.bin(-0.1), (0, true));
    }

    #[test]
    fn degenerate() {
        assert!(LossPartition::uniform(0.0, 1.0, 1).is_err());
        assert!(LossPartition::uniform(1.0, 1.0, 4).is_err());
        let p = LossPartition::from_values(&[3.0; 5], 8, 0.05).unwrap();
        assert!(p.lower() < 3.0 && p.upper() > 3.0);
    }

    proptest! {
        #[test]
        fn every_value_in_exactly_one_bin(v in -10.0f64..10.0, k in 2usize..80) {
            let p = LossPartition::uniform(-3.0, 4.0, k).unwrap();
            prop_assert!(p.edges.windows(2).all(|w| w[0] < w[1]));
            let (i, clamped) = p.bin(v);
            prop_assert!(i < k);
            if !clamped && v < p.upper() {
                prop_assert!(p.edges[i] <= v && v < p.edges[i + 1]);
            }
        }
    }
}
