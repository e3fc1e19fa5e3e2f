//! Dense complex linear-algebra helpers shared across the crate.
//!
//! Everything here operates on Hermitian matrices through their
//! eigendecomposition; determinants, inverses, square roots and log-dets are
//! all derived from the (real) eigenvalues so that symmetry is preserved
//! exactly and `log det` stays stable as a sum of `ln λ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest entrywise deviation from Hermitian symmetry, `max |A - A†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Hermitian part `(A + A†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix: `A = U diag(λ) U†` with real λ.
pub struct HermEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

/// Decompose a Hermitian matrix. The input is symmetrized first; callers are
/// expected to have checked the Hermiticity defect where it matters.
pub fn eigh(m: &CMatrix) -> HermEigen {
    let se = hermitian_part(m).symmetric_eigen();
    HermEigen {
        values: se.eigenvalues,
        vectors: se.eigenvectors,
    }
}

impl HermEigen {
    /// Rebuild `U f(λ) U†` for a real scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = Complex64::new(f(self.values[j]), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).min()
}

/// `ln det A` for Hermitian positive definite `A`, as a sum of `ln λ`.
pub fn log_det_pd(m: &CMatrix) -> Result<f64> {
    let eig = eigh(m);
    if eig.min() <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive definite (min eigenvalue {:.3e})",
            eig.min()
        )));
    }
    Ok(eig.values.iter().map(|l| l.ln()).sum())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inv_pd(m: &CMatrix) -> Result<CMatrix> {
    let eig = eigh(m);
    if eig.min() <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive definite (min eigenvalue {:.3e})",
            eig.min()
        )));
    }
    Ok(eig.map(|l| 1.0 / l))
}

/// Hermitian square root of a PSD matrix; small negative eigenvalues within
/// `clip_tol` are clipped to zero, anything below that is rejected.
pub fn sqrt_psd(m: &CMatrix, clip_tol: f64) -> Result<CMatrix> {
    let eig = eigh(m);
    if eig.min() < -clip_tol {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive semidefinite (min eigenvalue {:.3e})",
            eig.min()
        )));
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// `A^{-1/2}` for Hermitian positive definite `A`.
pub fn inv_sqrt_pd(m: &CMatrix) -> Result<CMatrix> {
    let eig = eigh(m);
    if eig.min() <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive definite (min eigenvalue {:.3e})",
            eig.min()
        )));
    }
    Ok(eig.map(|l| 1.0 / l.sqrt()))
}

/// Frobenius projection onto the PSD cone (negative eigenvalues to zero).
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    eigh(m).map(|l| l.max(0.0))
}

/// Sorted (ascending) eigenvalues of a Hermitian matrix.
pub fn sorted_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = eigh(m).values.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Gauss–Hermite nodes and weights for `∫ e^{-t²} f(t) dt ≈ Σ w_i f(t_i)`,
/// by Golub–Welsch on the Jacobi matrix.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut jac = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let se = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|j| {
            let v0 = se.eigenvectors[(0, j)];
            (se.eigenvalues[j], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut jac = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let se = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|j| {
            let v0 = se.eigenvectors[(0, j)];
            (se.eigenvalues[j], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_recovers_matrix() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(2.0, 0.0)],
        );
        let back = eigh(&m).map(|l| l);
        assert!((&back - &m).norm() < 1e-12);
    }

    #[test]
    fn log_det_matches_scalar() {
        let m = CMatrix::from_row_slice(1, 1, &[c(2.0, 0.0)]);
        assert!((log_det_pd(&m).unwrap() - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(3.0, 0.0)],
        );
        let w = inv_sqrt_pd(&m).unwrap();
        let prod = &w * &m * &w;
        let id = CMatrix::identity(2, 2);
        assert!((&prod - &id).norm() < 1e-12);
    }

    #[test]
    fn gauss_hermite_integrates_moments() {
        let (t, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((m0 - sqrt_pi).abs() < 1e-12);
        assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomial() {
        let (t, w) = gauss_legendre(8);
        let m2: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum();
        assert!((m2 - 2.0 / 3.0).abs() < 1e-13);
    }
}
