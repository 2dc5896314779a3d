//! Ergodic statistics of orbits.

mod autocorr;
mod average;
mod bifurcation;
mod lyapunov;
mod mixing;
mod period;

pub use autocorr::{autocorrelation, AutocorrSeries};
pub use average::{time_average, ErgodicAverage};
pub use bifurcation::{bifurcation_scan, scan_inits, BifurcationCell, BifurcationScan, ScanSettings};
pub use lyapunov::{lyapunov_1d, LyapunovEstimate, DEFAULT_LOG_FLOOR};
pub use mixing::{mixing_rate_fit, MixingFit};
pub use period::{detect_period, Period};
