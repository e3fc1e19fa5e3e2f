//! Complex covariance-matrix algebra for gauge-invariant Gaussian states,
//! observables, characteristic functions, outcome densities and differential
//! entropies.
//!
//! # Conventions
//!
//! The phase space is `ℂˢ`. A gauge-invariant Gaussian state is described by
//! its complex covariance matrix `Λ = Tr a ρ a†` (photon-number units) and a
//! displacement `z ∈ ℂˢ`. All outcome densities are taken with respect to the
//! reference measure
//!
//! ```text
//! μ(d²ˢz) = π⁻ˢ d²ˢz ,
//! ```
//!
//! so the ideal-heterodyne output of the vacuum has μ-density `exp(-|z|²)`
//! and the differential entropy of a complex Gaussian μ-density with
//! covariance `A` is `s + ln det A`. The Lebesgue density is the μ-density
//! divided by `πˢ`. All entropies and informations are in nats.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codec::{self, MatrixJson};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues of a covariance in `[-PSD_TOL, 0)` are clipped to zero;
/// anything below is rejected.
pub const PSD_TOL: f64 = 1e-12;
/// Nondegeneracy gate for covariances fed to the duality construction.
pub const MIN_EIG: f64 = 1e-10;
/// Nondegeneracy gate for `|det K|` of an observable rescaling.
pub const MIN_DET: f64 = 1e-12;

/// A complex `s×s` Hermitian matrix. Construction symmetrizes exactly after
/// checking the Hermiticity defect, so stored entries always satisfy
/// `A[j][k] == conj(A[k][j])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Validate and wrap a Hermitian matrix.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "expected a nonempty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&mat);
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {:.3e} > {:.0e})",
                defect, HERMITICITY_TOL
            )));
        }
        Ok(HermitianMatrix {
            mat: linalg::hermitian_part(&mat),
        })
    }

    /// Validate as a covariance: Hermitian and PSD with eigenvalues above
    /// `-PSD_TOL` (small negatives are clipped to zero).
    pub fn psd(mat: CMatrix) -> Result<Self> {
        let h = Self::new(mat)?;
        let eig = linalg::eigh(&h.mat);
        if eig.min() < -PSD_TOL {
            return Err(Error::InvalidInput(format!(
                "covariance is not positive semidefinite (min eigenvalue {:.3e})",
                eig.min()
            )));
        }
        if eig.min() < 0.0 {
            return Ok(HermitianMatrix {
                mat: eig.map(|l| l.max(0.0)),
            });
        }
        Ok(h)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix {
            mat: CMatrix::identity(dim, dim),
        }
    }

    /// Diagonal matrix from real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let s = diag.len();
        let mut m = CMatrix::zeros(s, s);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        HermitianMatrix { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Entrywise sum (dimensions must agree).
    pub fn sum(&self, other: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        HermitianMatrix {
            mat: &self.mat + &other.mat,
        }
    }

    /// `A + c I`.
    pub fn plus_identity(&self, c: f64) -> HermitianMatrix {
        let mut m = self.mat.clone();
        for i in 0..self.dim() {
            m[(i, i)] += Complex64::new(c, 0.0);
        }
        HermitianMatrix { mat: m }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.mat)
    }

    /// Check the nondegeneracy gate used by the duality construction.
    pub fn require_nondegenerate(&self, what: &str) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < MIN_EIG {
            return Err(Error::UnsupportedInput(format!(
                "{what} is degenerate (min eigenvalue {:.3e} < {:.0e})",
                min, MIN_EIG
            )));
        }
        Ok(())
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        HermitianMatrix::new(j.to_matrix()?)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> MatrixJson {
        MatrixJson::from_matrix(&h.mat)
    }
}

/// A (possibly displaced) gauge-invariant Gaussian state: covariance `Λ` and
/// mean `z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianState {
    pub cov: HermitianMatrix,
    #[serde(with = "codec::cvector")]
    pub mean: CVector,
}

impl GaussianState {
    pub fn new(cov: HermitianMatrix, mean: CVector) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::InvalidInput(format!(
                "mean has length {} but covariance is {}-dimensional",
                mean.len(),
                cov.dim()
            )));
        }
        Ok(GaussianState { cov, mean })
    }

    /// Zero-mean state with the given covariance.
    pub fn centered(cov: HermitianMatrix) -> Self {
        let s = cov.dim();
        GaussianState {
            cov,
            mean: CVector::zeros(s),
        }
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }
}

/// A gauge-covariant Gaussian observable `(K, N)`: outcome `z` corresponds to
/// the displaced noise state at `Kz`, with `K` nondegenerate and `N` PSD.
/// `K = I, N = 0` is the ideal multimode heterodyne measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianObservable {
    #[serde(with = "codec::cmatrix")]
    rescale: CMatrix,
    noise: HermitianMatrix,
    #[serde(skip)]
    log_abs_det_rescale: f64,
}

impl GaussianObservable {
    pub fn new(rescale: CMatrix, noise: HermitianMatrix) -> Result<Self> {
        if rescale.nrows() != rescale.ncols() || rescale.nrows() != noise.dim() {
            return Err(Error::InvalidInput(format!(
                "rescaling is {}x{} but noise is {}-dimensional",
                rescale.nrows(),
                rescale.ncols(),
                noise.dim()
            )));
        }
        let noise = HermitianMatrix::psd(noise.into_matrix())?;
        let det = rescale.clone().lu().determinant();
        if det.norm() <= MIN_DET {
            return Err(Error::InvalidInput(format!(
                "rescaling matrix is singular (|det K| = {:.3e} <= {:.0e})",
                det.norm(),
                MIN_DET
            )));
        }
        Ok(GaussianObservable {
            rescale,
            noise,
            log_abs_det_rescale: det.norm().ln(),
        })
    }

    /// The ideal heterodyne measurement `(I, 0)`.
    pub fn heterodyne(dim: usize) -> Self {
        GaussianObservable {
            rescale: CMatrix::identity(dim, dim),
            noise: HermitianMatrix::zeros(dim),
            log_abs_det_rescale: 0.0,
        }
    }

    /// Noisy heterodyne `(I, N)`.
    pub fn noisy_heterodyne(noise: HermitianMatrix) -> Result<Self> {
        let s = noise.dim();
        Self::new(CMatrix::identity(s, s), noise)
    }

    pub fn dim(&self) -> usize {
        self.noise.dim()
    }

    pub fn rescale(&self) -> &CMatrix {
        &self.rescale
    }

    pub fn noise(&self) -> &HermitianMatrix {
        &self.noise
    }

    /// `ln |det K|`.
    pub fn log_abs_det_rescale(&self) -> f64 {
        self.log_abs_det_rescale
    }
}

/// A Gaussian ensemble: displaced copies of a fixed noise state `ρ_N`, with
/// letters `z` drawn from the zero-mean Gaussian prior of covariance `Σ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianEnsemble {
    pub prior_cov: HermitianMatrix,
    pub state_noise: HermitianMatrix,
}

impl GaussianEnsemble {
    pub fn new(prior_cov: HermitianMatrix, state_noise: HermitianMatrix) -> Result<Self> {
        if prior_cov.dim() != state_noise.dim() {
            return Err(Error::InvalidInput(format!(
                "prior covariance is {}-dimensional but state noise is {}-dimensional",
                prior_cov.dim(),
                state_noise.dim()
            )));
        }
        let prior_cov = HermitianMatrix::psd(prior_cov.into_matrix())?;
        let state_noise = HermitianMatrix::psd(state_noise.into_matrix())?;
        Ok(GaussianEnsemble {
            prior_cov,
            state_noise,
        })
    }

    pub fn dim(&self) -> usize {
        self.prior_cov.dim()
    }

    /// Gate used by operations that require nondegenerate `Σ` and `N`.
    pub fn require_nondegenerate(&self) -> Result<()> {
        self.prior_cov.require_nondegenerate("prior covariance")?;
        self.state_noise.require_nondegenerate("state noise")?;
        Ok(())
    }
}

/// Quantum characteristic function of a displaced Gaussian state:
/// `exp[ 2i·Im(z*w) - w*(Λ + I/2)w ]`.
pub fn char_fn(state: &GaussianState, w: &CVector) -> Result<Complex64> {
    if w.len() != state.dim() {
        return Err(Error::InvalidInput(format!(
            "argument has length {} but state is {}-dimensional",
            w.len(),
            state.dim()
        )));
    }
    let lw = state.cov.as_matrix() * w;
    let quad = w.dotc(&lw).re + 0.5 * w.norm_squared();
    let phase = 2.0 * state.mean.dotc(w).im;
    Ok(Complex64::new(-quad, phase).exp())
}

/// μ-density of the outcome distribution of observable `(K, N)` on the state
/// `(Λ, z₀)`, evaluated at `z`:
///
/// ```text
/// p(z) = |det K|² · det(Λ+N+I)⁻¹ · exp[ -(Kz - z₀)*(Λ+N+I)⁻¹(Kz - z₀) ]
/// ```
///
/// For `K = I` this is the complex Gaussian μ-density with mean `z₀` and
/// covariance `Λ+N+I`; general `K` rescales the outcome variable.
pub fn output_density(
    state: &GaussianState,
    obs: &GaussianObservable,
    outcome: &CVector,
) -> Result<f64> {
    let s = state.dim();
    if obs.dim() != s || outcome.len() != s {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: state {}, observable {}, outcome {}",
            s,
            obs.dim(),
            outcome.len()
        )));
    }
    let a = state.cov.sum(obs.noise()).plus_identity(1.0);
    // Λ+N+I >= I, so the Cholesky factorization cannot fail.
    let chol = a
        .into_matrix()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("output covariance not factorizable".into()))?;
    let mut log_det = 0.0;
    let l = chol.l_dirty();
    for i in 0..s {
        log_det += 2.0 * l[(i, i)].norm().ln();
    }
    let u = obs.rescale() * outcome - &state.mean;
    let x = chol.solve(&u);
    let quad = u.dotc(&x).re;
    Ok((2.0 * obs.log_abs_det_rescale() - log_det - quad).exp())
}

/// Differential entropy `s + ln det A` (nats) of the complex Gaussian
/// μ-density with positive definite covariance `A`.
pub fn diff_entropy_gaussian(a: &HermitianMatrix) -> Result<f64> {
    Ok(a.dim() as f64 + linalg::log_det_pd(a.as_matrix())?)
}

/// Average state of a Gaussian ensemble: the zero-mean Gaussian state with
/// covariance `Σ + N`.
pub fn ensemble_average(ens: &GaussianEnsemble) -> GaussianState {
    GaussianState::centered(ens.prior_cov.sum(&ens.state_noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn herm1(x: f64) -> HermitianMatrix {
        HermitianMatrix::from_diagonal(&[x])
    }

    #[test]
    fn char_fn_trivial_at_origin() {
        let st = GaussianState::centered(herm1(0.0));
        let w = CVector::zeros(1);
        assert_eq!(char_fn(&st, &w).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn char_fn_thermal_value() {
        // Λ=[1], z=0, w=[1]: exponent -w*(Λ+1/2)w = -3/2.
        let st = GaussianState::centered(herm1(1.0));
        let w = CVector::from_element(1, c(1.0, 0.0));
        let got = char_fn(&st, &w).unwrap();
        assert!((got - c((-1.5_f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn char_fn_displaced_value() {
        // Λ=0, z=[1], w=[i]: z*w = i, so exp(2i·Im(i) - w*w/2) = exp(2i - 1/2).
        let st = GaussianState::new(herm1(0.0), CVector::from_element(1, c(1.0, 0.0))).unwrap();
        let w = CVector::from_element(1, c(0.0, 1.0));
        let got = char_fn(&st, &w).unwrap();
        let want = Complex64::new(-0.5, 2.0).exp();
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn char_fn_is_one_at_zero_argument() {
        let st = GaussianState::new(
            HermitianMatrix::from_diagonal(&[0.3, 1.7]),
            CVector::from_iterator(2, [c(0.2, -0.4), c(1.0, 0.5)]),
        )
        .unwrap();
        let w = CVector::zeros(2);
        assert_eq!(char_fn(&st, &w).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn output_density_unit_thermal() {
        // Σ=[1], N=[0], K=I at the origin: 1/det(Σ+N+I) = 1/2.
        let st = GaussianState::centered(herm1(1.0));
        let obs = GaussianObservable::heterodyne(1);
        let z = CVector::zeros(1);
        assert!((output_density(&st, &obs, &z).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn output_density_vacuum_heterodyne() {
        let st = GaussianState::centered(herm1(0.0));
        let obs = GaussianObservable::heterodyne(1);
        let z = CVector::zeros(1);
        assert!((output_density(&st, &obs, &z).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn output_density_rescaling_transform() {
        // p̃(z) = p(Kz)·|det K|² for (K, N) against (I, N).
        let st = GaussianState::new(
            HermitianMatrix::from_diagonal(&[0.7, 1.3]),
            CVector::from_iterator(2, [c(0.1, 0.2), c(-0.3, 0.4)]),
        )
        .unwrap();
        let noise = HermitianMatrix::from_diagonal(&[0.2, 0.5]);
        let k = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.3), c(-0.2, 0.1), c(0.4, 0.0), c(2.0, -0.5)],
        );
        let obs_k = GaussianObservable::new(k.clone(), noise.clone()).unwrap();
        let obs_i = GaussianObservable::noisy_heterodyne(noise).unwrap();
        let z = CVector::from_iterator(2, [c(0.5, -0.1), c(0.2, 0.6)]);
        let kz = &k * &z;
        let lhs = output_density(&st, &obs_k, &z).unwrap();
        let det = k.lu().determinant().norm();
        let rhs = det * det * output_density(&st, &obs_i, &kz).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn entropy_values() {
        assert!((diff_entropy_gaussian(&HermitianMatrix::identity(1)).unwrap() - 1.0).abs() < 1e-15);
        let want = 1.0 + 2.0_f64.ln();
        assert!((diff_entropy_gaussian(&herm1(2.0)).unwrap() - want).abs() < 1e-14);
        let a3 = HermitianMatrix::from_diagonal(&[2.0, 2.0, 2.0]);
        let want3 = 3.0 + 3.0 * 2.0_f64.ln();
        assert!((diff_entropy_gaussian(&a3).unwrap() - want3).abs() < 1e-13);
    }

    #[test]
    fn entropy_rejects_singular() {
        assert!(diff_entropy_gaussian(&herm1(0.0)).is_err());
    }

    #[test]
    fn ensemble_average_sums_covariances() {
        let ens = GaussianEnsemble::new(
            HermitianMatrix::from_diagonal(&[1.0, 2.0]),
            HermitianMatrix::from_diagonal(&[3.0, 4.0]),
        )
        .unwrap();
        let avg = ensemble_average(&ens);
        assert_eq!(avg.cov.as_matrix()[(0, 0)], c(4.0, 0.0));
        assert_eq!(avg.cov.as_matrix()[(1, 1)], c(6.0, 0.0));
        assert!(avg.mean.norm() == 0.0);
    }

    #[test]
    fn point_prior_average() {
        let ens = GaussianEnsemble::new(herm1(0.0), herm1(0.7)).unwrap();
        let avg = ensemble_average(&ens);
        assert!((avg.cov.as_matrix()[(0, 0)] - c(0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn observable_rejects_singular_rescaling() {
        let k = CMatrix::zeros(1, 1);
        assert!(GaussianObservable::new(k, herm1(0.0)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_invalid_input() {
        let st = GaussianState::centered(herm1(1.0));
        let w = CVector::zeros(2);
        match char_fn(&st, &w) {
            Err(Error::InvalidInput(_)) => {}
            other => panic!("expected invalid-input error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = HermitianMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.25, -0.5), c(0.25, 0.5), c(2.0, 0.0)],
        ))
        .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&text).unwrap();
        assert!((back.as_matrix() - m.as_matrix()).norm() < 1e-15);
    }
}
