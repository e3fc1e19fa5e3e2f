//! Closed-form capacity and information quantities of gauge-covariant
//! Gaussian observables and ensembles.
//!
//! The χ-capacity of the observable `(K, N)` under an input-covariance
//! constraint `Σ` is `ln det(I + (N+I)⁻¹Σ)`, attained on the Gaussian
//! ensemble of coherent states with prior covariance `Σ`; the rescaling `K`
//! has no effect. The accessible information of the Gaussian ensemble
//! `(Σ, N)` takes the same value and is attained on ideal heterodyne
//! measurements `(K, 0)` for any nondegenerate `K`.

use crate::error::Result;
use crate::gauss::{diff_entropy_gaussian, GaussianEnsemble, GaussianObservable, HermitianMatrix};
use crate::linalg;

/// χ-capacity value together with the maximizer description.
#[derive(Debug, Clone)]
pub struct ChiCapacity {
    /// Capacity in nats.
    pub nats: f64,
    /// Prior covariance of the optimal ensemble (equal to the constraint
    /// covariance). The optimal ensemble is the Gaussian distribution with
    /// this covariance over coherent states.
    pub optimal_prior: HermitianMatrix,
}

/// Accessible information value together with the maximizer description.
#[derive(Debug, Clone)]
pub struct AccessibleInformation {
    /// Accessible information in nats.
    pub nats: f64,
    /// Noise matrix of the maximizing observable family: the zero matrix.
    /// Every observable `(K, 0)` with nondegenerate `K` attains the value.
    pub optimal_noise: HermitianMatrix,
}

/// `ln det(I + base⁻¹ · sigma)` for Hermitian PSD `sigma` and PD `base`,
/// computed through the similarity-equivalent Hermitian form
/// `base^{-1/2} sigma base^{-1/2}` so the spectrum is real and the log-det is
/// a stable sum of `ln(1+λ)`.
fn log_det_ratio(sigma: &HermitianMatrix, base: &HermitianMatrix) -> Result<f64> {
    let w = linalg::inv_sqrt_pd(base.as_matrix())?;
    let m = &w * sigma.as_matrix() * &w;
    let eig = linalg::eigh(&m);
    Ok(eig.values.iter().map(|l| l.max(0.0).ln_1p()).sum())
}

/// Minimal output differential entropy of the observable `(K, N)`:
/// `s + ln det(N+I) - 2 ln|det K|`, attained on the vacuum input.
pub fn min_output_entropy(obs: &GaussianObservable) -> Result<f64> {
    let base = obs.noise().plus_identity(1.0);
    Ok(diff_entropy_gaussian(&base)? - 2.0 * obs.log_abs_det_rescale())
}

/// Maximal output differential entropy over inputs with covariance `Σ`:
/// `s + ln det(Σ+N+I) - 2 ln|det K|`, attained on the Gaussian state `ρ_Σ`.
pub fn max_output_entropy(obs: &GaussianObservable, input_cov: &HermitianMatrix) -> Result<f64> {
    let a = input_cov.sum(obs.noise()).plus_identity(1.0);
    Ok(diff_entropy_gaussian(&a)? - 2.0 * obs.log_abs_det_rescale())
}

/// χ-capacity of the observable `(K, N)` over ensembles with average-state
/// covariance `Σ`: `ln det(I + (N+I)⁻¹Σ)`. Independent of `K`.
pub fn chi_capacity(obs: &GaussianObservable, input_cov: &HermitianMatrix) -> Result<ChiCapacity> {
    let input_cov = HermitianMatrix::psd(input_cov.as_matrix().clone())?;
    let base = obs.noise().plus_identity(1.0);
    let nats = log_det_ratio(&input_cov, &base)?;
    Ok(ChiCapacity {
        nats,
        optimal_prior: input_cov,
    })
}

/// Shannon information extracted from the Gaussian ensemble `(Σ, N_e)` by the
/// Gaussian observable `(K, N_m)`:
/// `ln det(Σ + N_e + N_m + I) - ln det(N_e + N_m + I)`. Independent of `K`.
pub fn gaussian_ensemble_information(
    ens: &GaussianEnsemble,
    obs: &GaussianObservable,
) -> Result<f64> {
    let base = ens.state_noise.sum(obs.noise()).plus_identity(1.0);
    log_det_ratio(&ens.prior_cov, &base)
}

/// Accessible information of the nondegenerate Gaussian ensemble `(Σ, N)`:
/// `ln det(I + (N+I)⁻¹Σ)`, attained on any ideal heterodyne `(K, 0)` with
/// nondegenerate `K`.
pub fn accessible_information(ens: &GaussianEnsemble) -> Result<AccessibleInformation> {
    ens.require_nondegenerate()?;
    let base = ens.state_noise.plus_identity(1.0);
    let nats = log_det_ratio(&ens.prior_cov, &base)?;
    Ok(AccessibleInformation {
        nats,
        optimal_noise: HermitianMatrix::zeros(ens.dim()),
    })
}
