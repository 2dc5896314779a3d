use serde::{Deserialize, Serialize};

use crate::landscapes::{Sample, SyntheticDataset};
use crate::{Error, Result, RngStream};

/// Two training sets differing in exactly one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedPair {
    pub base: Vec<Sample>,
    pub perturbed: Vec<Sample>,
    /// 0-based index of the replaced sample.
    pub index: usize,
    pub replacement: Sample,
}

impl PerturbedPair {
    pub fn new(base: Vec<Sample>, index: usize, replacement: Sample) -> Result<Self> {
        if index >= base.len() {
            return Err(Error::param(format!(
                "index {index} out of range for n = {}",
                base.len()
            )));
        }
        let mut perturbed = base.clone();
        perturbed[index] = replacement.clone();
        Ok(Self {
            base,
            perturbed,
            index,
            replacement,
        })
    }

    /// The degenerate pair `S′ = S` (replacement equal to the original).
    pub fn identical(base: Vec<Sample>) -> Result<Self> {
        let z = base
            .first()
            .cloned()
            .ok_or_else(|| Error::param("empty training set"))?;
        Self::new(base, 0, z)
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    /// The same pair with the roles of `S` and `S′` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            base: self.perturbed.clone(),
            perturbed: self.base.clone(),
            index: self.index,
            replacement: self.base[self.index].clone(),
        }
    }
}

/// Replaces sample `k` (0-based) by a fresh draw from the generator of
/// `dataset`, corruption law included.
pub fn stochastic_perturbation(
    dataset: &SyntheticDataset,
    k: usize,
    rng: &mut RngStream,
) -> Result<PerturbedPair> {
    if k >= dataset.n {
        return Err(Error::param(format!(
            "index {k} out of range for n = {}",
            dataset.n
        )));
    }
    let z = dataset.resample_point(rng);
    PerturbedPair::new(dataset.samples.clone(), k, z)
}
