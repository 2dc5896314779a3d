use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    Periodic(usize),
    Aperiodic,
}

impl Period {
    /// Anything other than a fixed point.
    pub fn is_nontrivial(&self) -> bool {
        !matches!(self, Period::Periodic(1))
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Periodic(q) => write!(f, "{q}"),
            Period::Aperiodic => f.write_str("aperiodic"),
        }
    }
}

/// Smallest `q ≤ q_max` with `|x_{t+q} − x_t| < tol` for every recorded `t`.
/// `q_max` defaults to a quarter of the sample count.
pub fn detect_period(samples: &[f64], tol: f64, q_max: Option<usize>) -> Period {
    let n = samples.len();
    if n <= 1 {
        return Period::Periodic(1);
    }
    let q_max = q_max.unwrap_or(n / 4).clamp(1, n - 1);
    (1..=q_max)
        .find(|&q| samples.iter().zip(&samples[q..]).all(|(a, b)| (a - b).abs() < tol))
        .map_or(Period::Aperiodic, Period::Periodic)
}
