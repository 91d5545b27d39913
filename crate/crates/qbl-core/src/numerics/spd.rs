//! Positive-definite float kernels used by the Gaussian optimizer: Cholesky
//! log-determinants, inverses, and symmetric condition numbers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric positive definite matrix, certified by a successful Cholesky
/// factorization at construction time.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
}

impl SpdMatrix {
    /// Symmetrizes and certifies positive definiteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                what: "SpdMatrix::new".to_string(),
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        if sym.iter().any(|v| !v.is_finite()) {
            return Err(Error::not_pd("non-finite entries"));
        }
        if nalgebra::linalg::Cholesky::new(sym.clone()).is_none() {
            return Err(Error::not_pd("Cholesky factorization failed"));
        }
        Ok(SpdMatrix { mat: sym })
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix {
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn logdet(&self) -> Result<f64> {
        logdet_spd(&self.mat)
    }
}

/// Log-determinant via Cholesky. `m` must be symmetric; failure of the
/// factorization reports the matrix as not positive definite.
pub fn logdet_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::linalg::Cholesky::new(m.clone())
        .ok_or_else(|| Error::not_pd(format!("{}x{} matrix", m.nrows(), m.ncols())))?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::not_pd("nonpositive Cholesky pivot"));
        }
        acc += d.ln();
    }
    Ok(2.0 * acc)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::linalg::Cholesky::new(m.clone())
        .ok_or_else(|| Error::not_pd(format!("{}x{} matrix", m.nrows(), m.ncols())))?;
    Ok(chol.inverse())
}

/// 2-norm condition number of a symmetric matrix from its eigenvalues.
/// Returns +infinity when the smallest eigenvalue magnitude underflows.
pub fn cond_symmetric(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigenvalues();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &v in eig.iter() {
        let a = v.abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if lo <= 0.0 || !lo.is_finite() {
        return f64::INFINITY;
    }
    hi / lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logdet_of_identity_is_zero() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(logdet_spd(&id).unwrap(), 0.0);
    }

    #[test]
    fn logdet_of_diagonal() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 5.0]));
        assert_relative_eq!(logdet_spd(&d).unwrap(), (10.0f64).ln(), epsilon = 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            logdet_spd(&m),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(SpdMatrix::new(m).is_err());
    }

    #[test]
    fn new_symmetrizes() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.0, 2.0]);
        let s = SpdMatrix::new(m).unwrap();
        assert_relative_eq!(s.as_matrix()[(0, 1)], 0.05);
        assert_relative_eq!(s.as_matrix()[(1, 0)], 0.05);
    }

    #[test]
    fn inverse_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&m).unwrap();
        let prod = &m * &inv;
        assert_relative_eq!(prod[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(prod[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn condition_number_of_scaled_diag() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1e6, 1.0]));
        assert_relative_eq!(cond_symmetric(&d), 1e6, epsilon = 1.0);
    }
}
