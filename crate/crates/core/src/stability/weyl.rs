use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::landscapes::linearized::sorted_eigenvalues;
use crate::landscapes::LinearizedModel;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    /// `‖K̂_S⁻¹ − K̂_S′⁻¹‖₂`.
    pub inverse_difference: f64,
    pub inv_theta_min: f64,
    pub inv_theta_min_perturbed: f64,
    /// `‖K̂_S′ − K̂_S‖₂`.
    pub kernel_difference: f64,
    /// `|θ_i(K̂_S′) − θ_i(K̂_S)|`, eigenvalues paired in ascending order.
    pub residuals: Vec<f64>,
    /// `max_i residual_i − ‖K̂_S′ − K̂_S‖₂`; non-positive up to round-off.
    pub slack: f64,
}

pub(crate) fn spectral_norm_symmetric(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0, |a, v| a.max(v.abs()))
}

/// Compares the NTK Gram matrices `K̂ = ΦΦᵀ` of two linearized models.
pub fn weyl_stability_bound(s: &LinearizedModel, sp: &LinearizedModel) -> Result<WeylReport> {
    if s.n() != sp.n() {
        return Err(Error::Dimension {
            expected: s.n(),
            got: sp.n(),
            context: "sample count of the perturbed model",
        });
    }
    let (k, kp) = (s.ntk(), sp.ntk());
    let (th, thp) = (sorted_eigenvalues(k.clone()), sorted_eigenvalues(kp.clone()));
    let inv = |m: &DMatrix<f64>, theta: &[f64], which: &str| -> Result<DMatrix<f64>> {
        let (lo, hi) = (theta[0], theta[theta.len() - 1]);
        if lo <= 1e-12 * hi.max(f64::MIN_POSITIVE) * m.nrows() as f64 {
            return Err(Error::Singular(format!("{which} kernel has θ_min = {lo:e}")));
        }
        m.clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::Singular(format!("{which} kernel is not positive definite")))
    };
    let ki = inv(&k, &th, "base")?;
    let kpi = inv(&kp, &thp, "perturbed")?;
    let kernel_difference = spectral_norm_symmetric(&(&kp - &k));
    let residuals: Vec<f64> = th.iter().zip(&thp).map(|(a, b)| (a - b).abs()).collect();
    let slack = residuals.iter().copied().fold(0.0, f64::max) - kernel_difference;
    Ok(WeylReport {
        inverse_difference: spectral_norm_symmetric(&(&ki - &kpi)),
        inv_theta_min: 1.0 / th[0],
        inv_theta_min_perturbed: 1.0 / thp[0],
        kernel_difference,
        residuals,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;
    use nalgebra::DVector;
    use rand_distr::{Distribution, StandardNormal};

    fn model(phi: DMatrix<f64>) -> LinearizedModel {
        let n = phi.nrows();
        let d = phi.ncols();
        LinearizedModel::new(phi, DVector::zeros(n), DVector::zeros(d), 0.1).unwrap()
    }

    #[test]
    fn two_by_two() {
        let a = model(DMatrix::identity(2, 2));
        let b = model(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        let r = weyl_stability_bound(&a, &b).unwrap();
        assert!((r.inverse_difference - 0.75).abs() < 1e-14);
        assert_eq!(r.inv_theta_min, 1.0);
        assert!((r.inv_theta_min_perturbed - 1.0).abs() < 1e-14);
        assert!((r.kernel_difference - 3.0).abs() < 1e-14);
        assert!(r.slack <= 1e-10);
    }

    #[test]
    fn identical_models() {
        let a = model(DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, 2.0]));
        let r = weyl_stability_bound(&a, &a.clone()).unwrap();
        assert_eq!(r.inverse_difference, 0.0);
        assert_eq!(r.kernel_difference, 0.0);
        assert!(r.residuals.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rank_one_row_perturbation() {
        let mut rng = RngStream::new(17, 0);
        for _ in 0..20 {
            let phi = DMatrix::from_fn(6, 15, |_, _| StandardNormal.sample(&mut rng));
            let mut phip = phi.clone();
            for j in 0..15 {
                phip[(2, j)] = StandardNormal.sample(&mut rng);
            }
            let r = weyl_stability_bound(&model(phi), &model(phip)).unwrap();
            assert!(r.slack <= 1e-10, "slack {}", r.slack);
        }
    }

    #[test]
    fn singular_kernel() {
        let a = model(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]));
        let b = model(DMatrix::identity(2, 2));
        assert!(matches!(weyl_stability_bound(&a, &b), Err(Error::Singular(_))));
    }
}
