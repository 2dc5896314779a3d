use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Koopman eigenfunction `f(w) = vᵀw + vᵀb/(θ − 1)` of the affine map
/// `w ↦ Aw + b`, satisfying `f(Aw + b) = θ f(w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoopmanMode {
    pub eigenvalue: f64,
    /// Left eigenvector `v` of `A`.
    pub left_vector: Vec<f64>,
    /// `vᵀb/(θ − 1)`; `None` when `θ = 1` (the offset has a pole).
    pub offset: Option<f64>,
}

impl KoopmanMode {
    pub fn defined(&self) -> bool {
        self.offset.is_some()
    }

    pub fn evaluate(&self, w: &[f64]) -> Option<f64> {
        let lin: f64 = self.left_vector.iter().zip(w).map(|(a, b)| a * b).sum();
        self.offset.map(|c| lin + c)
    }
}

const UNIT_TOL: f64 = 1e-12;

/// Eigenpairs of `A` and the matching Koopman eigenfunctions. Symmetric
/// `A` (the NTK case) uses a symmetric eigen-solve; otherwise the real
/// eigenvalues of `A` are used with left eigenvectors from the null space
/// of `Aᵀ − θI`, and complex pairs are skipped.
pub fn koopman_spectrum_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<KoopmanMode>> {
    if !a.is_square() {
        return Err(Error::param("A must be square"));
    }
    if b.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: b.len(),
            context: "offset vector",
        });
    }
    let scale = a.amax().max(1.0);
    let symmetric = (a - a.transpose()).amax() <= 1e-12 * scale;
    let pairs: Vec<(f64, DVector<f64>)> = if symmetric {
        let eig = SymmetricEigen::new(a.clone());
        eig.eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .map(|(&t, v)| (t, v.into_owned()))
            .collect()
    } else {
        let n = a.nrows();
        a.complex_eigenvalues()
            .iter()
            .filter(|c| c.im.abs() <= 1e-10 * scale)
            .map(|c| {
                let m = a.transpose() - DMatrix::identity(n, n) * c.re;
                let svd = m.svd(false, true);
                let v_t = svd.v_t.expect("requested V^T");
                let (imin, _) = svd
                    .singular_values
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(y.1))
                    .expect("non-empty");
                (c.re, v_t.row(imin).transpose())
            })
            .collect()
    };
    let mut modes: Vec<KoopmanMode> = pairs
        .into_iter()
        .map(|(theta, v)| {
            let vb = v.dot(b);
            let offset = ((theta - 1.0).abs() > UNIT_TOL).then(|| vb / (theta - 1.0));
            KoopmanMode {
                eigenvalue: theta,
                left_vector: v.iter().copied().collect(),
                offset,
            }
        })
        .collect();
    modes.sort_by(|x, y| y.eigenvalue.abs().total_cmp(&x.eigenvalue.abs()));
    Ok(modes)
}
