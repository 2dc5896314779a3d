//! Statistical algorithmic stability and the bounds built on it.

mod bounds;
mod perturbation;
mod sas;
mod weyl;

pub use bounds::{
    empirical_risks, ntk_stability_transfer, theorem1_bound, theorem2_bound, BoundReport,
    RiskEstimate, ORDER_BOUND_LABEL,
};
pub use perturbation::{stochastic_perturbation, PerturbedPair};
pub use sas::{
    loss_statistics, sas_lower_bound, PairResult, SasProtocol, Statistic, StabilityReport,
};
pub use weyl::{weyl_stability_bound, WeylReport};
