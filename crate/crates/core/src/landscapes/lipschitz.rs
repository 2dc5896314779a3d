use serde::{Deserialize, Serialize};

use super::{Landscape, Sample};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Sampled estimate of the data-Lipschitz constant of `z ↦ ∇_w ℓ(z, w)`.
///
/// The value is a maximum over finitely many secants and therefore a lower
/// bound on the true constant `L_D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub pairs_evaluated: usize,
    pub degenerate_skipped: usize,
    pub lower_bound: bool,
}

pub fn grad_data_lipschitz<L, WS, DS>(
    landscape: &L,
    mut weight_sampler: WS,
    mut data_sampler: DS,
    trials: usize,
    pairs_per_trial: usize,
    rng: &mut RngStream,
) -> Result<LipschitzEstimate>
where
    L: Landscape + ?Sized,
    WS: FnMut(&mut RngStream) -> Vec<f64>,
    DS: FnMut(&mut RngStream) -> Sample,
{
    if trials == 0 || pairs_per_trial == 0 {
        return Err(Error::param("trials and pairs_per_trial must be at least 1"));
    }
    let d = landscape.dim();
    let (mut ga, mut gb) = (vec![0.0; d], vec![0.0; d]);
    let mut best = 0.0f64;
    let (mut evaluated, mut skipped) = (0, 0);
    for _ in 0..trials {
        let w = weight_sampler(rng);
        if w.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: w.len(),
                context: "sampled weights",
            });
        }
        for _ in 0..pairs_per_trial {
            let z1 = data_sampler(rng);
            let z2 = data_sampler(rng);
            let dist = z1.distance(&z2);
            if dist == 0.0 {
                skipped += 1;
                continue;
            }
            landscape.grad(&z1, &w, &mut ga);
            landscape.grad(&z2, &w, &mut gb);
            let diff = ga
                .iter()
                .zip(&gb)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            best = best.max(diff / dist);
            evaluated += 1;
        }
    }
    Ok(LipschitzEstimate {
        value: best,
        pairs_evaluated: evaluated,
        degenerate_skipped: skipped,
        lower_bound: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{LeastSquares, QuadraticMapLoss};
    use rand::Rng;

    fn box_sampler(rng: &mut RngStream) -> Sample {
        Sample::new(vec![rng.random_range(-1.0..1.0)], rng.random_range(-1.0..1.0))
    }

    #[test]
    fn data_independent_loss_gives_zero() {
        let q = QuadraticMapLoss::new(2.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        let est = grad_data_lipschitz(&q, |r| vec![r.random()], box_sampler, 5, 20, &mut rng).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.lower_bound);
    }

    #[test]
    fn regression_estimate_is_finite_positive() {
        let ls = LeastSquares::new(1);
        let mut rng = RngStream::new(1, 0);
        let est = grad_data_lipschitz(&ls, |_| vec![0.7], box_sampler, 3, 200, &mut rng).unwrap();
        assert!(est.value.is_finite() && est.value > 0.0);
    }

    #[test]
    fn degenerate_pairs_are_skipped() {
        let ls = LeastSquares::new(1);
        let mut rng = RngStream::new(1, 0);
        let est = grad_data_lipschitz(
            &ls,
            |_| vec![0.7],
            |_| Sample::new(vec![0.5], 0.5),
            2,
            10,
            &mut rng,
        )
        .unwrap();
        assert_eq!(est.degenerate_skipped, 20);
        assert_eq!(est.pairs_evaluated, 0);
    }

    #[test]
    fn matches_dense_grid_oracle() {
        // ∇_w (y − wx)²/2 = w x² − x y on the box [−1, 1]², w fixed.
        let w = 0.7;
        let grad = |x: f64, y: f64| w * x * x - x * y;
        let pts: Vec<(f64, f64)> = (0..=20)
            .flat_map(|i| (0..=20).map(move |j| (-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64)))
            .collect();
        let mut oracle = 0.0f64;
        for (a, &(x1, y1)) in pts.iter().enumerate() {
            for &(x2, y2) in &pts[a + 1..] {
                let dist = ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
                oracle = oracle.max((grad(x1, y1) - grad(x2, y2)).abs() / dist);
            }
        }
        let ls = LeastSquares::new(1);
        let mut rng = RngStream::new(5, 0);
        let est = grad_data_lipschitz(&ls, |_| vec![w], box_sampler, 1, 20_000, &mut rng).unwrap();
        assert!(
            (est.value - oracle).abs() <= 0.1 * oracle,
            "estimate {} vs oracle {oracle}",
            est.value
        );
    }
}
