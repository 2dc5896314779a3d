//! Gradient-based learning algorithms treated as dynamical systems.
//!
//! The crate is organised around five subsystems:
//!
//! * [`dynamics`]: update maps (GD/SGD with heavy-ball momentum), batch draws,
//!   reproducible orbits and orbit ensembles.
//! * [`landscapes`]: loss models with analytic gradients (the quadratic-map
//!   family, the linearized/NTK model, a toy two-layer network) and the
//!   synthetic corrupted-label datasets they train on.
//! * [`ergodic`]: time averages, Lyapunov exponents, bifurcation scans,
//!   period detection and loss autocorrelation.
//! * [`stability`]: stochastic perturbations, statistical algorithmic
//!   stability estimates and the generalization/perturbation bounds.
//! * [`markov`]: Ulam approximation of the loss-space Markov operator, its
//!   spectrum, and the Koopman spectrum of affine dynamics.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ergodic;
pub mod error;
pub mod io;
pub mod landscapes;
pub mod markov;
pub mod rng;
pub mod stability;

pub use dynamics::{
    draw_batch, run_ensemble, run_orbit, step, BatchDraw, Mode, Observable, OptimizerConfig,
    OrbitRecord, Schedule, WeightDomain, WeightVector,
};
pub use error::{Error, Result};
pub use landscapes::{Landscape, Sample};
pub use rng::RngStream;

pub use nalgebra;
