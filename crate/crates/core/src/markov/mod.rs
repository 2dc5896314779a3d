//! Ulam-type approximation of the loss-space Markov operator and the
//! Koopman spectrum of affine dynamics.
//!
//! The loss process is not Markovian in general; every transition matrix
//! built from a loss series is a Markov surrogate and is labeled as such.

mod koopman;
mod partition;
mod spectral;
mod tv;
mod ulam;

pub use koopman::{koopman_spectrum_linear, KoopmanMode};
pub use partition::LossPartition;
pub use spectral::{spectral_gap, stationary_distribution, SpectralReport, DENSE_LIMIT};
pub use tv::tv_convergence_curve;
pub use ulam::{ulam_transition, TransitionMatrix, SURROGATE_LABEL};
