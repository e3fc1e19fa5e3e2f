//! Ensemble–observable duality.
//!
//! For a nondegenerate Gaussian ensemble `(Σ, N)` the dual observable is
//! again Gaussian, `(K, Ñ)` with
//!
//! ```text
//! Σ̃ = Σ + N,
//! Ñ⁻¹ = √((I+Σ̃⁻¹)⁻¹) (N⁻¹ - Σ̃⁻¹) √((I+Σ̃⁻¹)⁻¹),
//! K  = √(Σ̃(Σ̃+I)) Σ⁻¹,
//! ```
//!
//! and the two capacity determinants coincide:
//! `det(I + (Ñ+I)⁻¹Σ̃) = det(I + (N+I)⁻¹Σ)`.
//!
//! The finite-dimensional counterpart swaps a discrete ensemble `{p_i, ρ_i}`
//! with a discrete POVM `{m_j, μ_j}` through the average state `ρ̄`:
//! it preserves the joint outcome distribution (transposed) and the average
//! state, hence the mutual information.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::{Error, Result};
use crate::gauss::{GaussianEnsemble, HermitianMatrix};
use crate::linalg::{self, CMatrix};

/// Relative eigenvalue threshold of the generalized inverse of the average
/// state.
pub const PINV_TOL: f64 = 1e-12;

/// Gaussian dual observable `(K, Ñ)` together with `Σ̃ = Σ + N`.
#[derive(Debug, Clone, Serialize)]
pub struct DualGaussianResult {
    /// Outcome rescaling matrix `K = √(Σ̃(Σ̃+I)) Σ⁻¹`.
    #[serde(with = "codec::cmatrix")]
    pub rescale: CMatrix,
    /// Dual noise covariance `Ñ`.
    pub dual_noise: HermitianMatrix,
    /// Average-state covariance `Σ̃ = Σ + N`.
    pub sigma_tilde: HermitianMatrix,
}

/// Construct the Gaussian dual observable of a nondegenerate ensemble.
pub fn dual_gaussian_observable(ens: &GaussianEnsemble) -> Result<DualGaussianResult> {
    ens.require_nondegenerate()?;
    let sigma = ens.prior_cov.as_matrix();
    let noise = ens.state_noise.as_matrix();
    let sigma_tilde = ens.prior_cov.sum(&ens.state_noise);

    let st_eig = linalg::eigh(sigma_tilde.as_matrix());
    // S = √((I+Σ̃⁻¹)⁻¹) and T = √(Σ̃(Σ̃+I)) share the eigenbasis of Σ̃.
    let s_half = st_eig.map(|l| (l / (l + 1.0)).sqrt());
    let t = st_eig.map(|l| (l * (l + 1.0)).sqrt());
    let sigma_tilde_inv = st_eig.map(|l| 1.0 / l);

    let noise_inv = linalg::inv_pd(noise)?;
    let core = linalg::hermitian_part(&(&noise_inv - &sigma_tilde_inv));
    let dual_noise_inv = linalg::hermitian_part(&(&s_half * core * &s_half));
    let dual_noise = HermitianMatrix::new(linalg::inv_pd(&dual_noise_inv)?)?;

    let rescale = &t * linalg::inv_pd(sigma)?;

    Ok(DualGaussianResult {
        rescale,
        dual_noise,
        sigma_tilde,
    })
}

/// Outcome of [`verify_capacity_identity`].
#[derive(Debug, Clone, Serialize)]
pub struct CapacityIdentity {
    /// `det(I + (Ñ+I)⁻¹Σ̃)` computed on the dual side.
    pub lhs: f64,
    /// `det(I + (N+I)⁻¹Σ)` computed on the primal side.
    pub rhs: f64,
    /// `|lhs - rhs| / |rhs|`.
    pub residual: f64,
    /// Largest relative mismatch between the sorted spectra of
    /// `(Ñ+I)⁻¹Σ̃` and `Σ(N+I)⁻¹`, which are similar via `T = √(Σ̃(Σ̃+I))`.
    pub similarity_defect: f64,
}

/// Evaluate both sides of the dual capacity determinant identity and the
/// intermediate similarity of the two spectra.
pub fn verify_capacity_identity(ens: &GaussianEnsemble) -> Result<CapacityIdentity> {
    let dual = dual_gaussian_observable(ens)?;

    let det_ratio = |sigma: &HermitianMatrix, base: &HermitianMatrix| -> Result<(f64, Vec<f64>)> {
        let w = linalg::inv_sqrt_pd(base.as_matrix())?;
        let m = &w * sigma.as_matrix() * &w;
        let mut eigs = linalg::sorted_eigenvalues(&m);
        for l in &mut eigs {
            *l = l.max(0.0);
        }
        let det = eigs.iter().map(|l| 1.0 + l).product();
        Ok((det, eigs))
    };

    let (lhs, dual_spectrum) = det_ratio(&dual.sigma_tilde, &dual.dual_noise.plus_identity(1.0))?;
    let (rhs, primal_spectrum) =
        det_ratio(&ens.prior_cov, &ens.state_noise.plus_identity(1.0))?;

    let similarity_defect = dual_spectrum
        .iter()
        .zip(&primal_spectrum)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1e-300))
        .fold(0.0, f64::max);

    Ok(CapacityIdentity {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / rhs.abs(),
        similarity_defect,
    })
}

/// A finite ensemble `{p_i, ρ_i}` of density matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteEnsemble {
    pub probs: Vec<f64>,
    #[serde(with = "cmatrix_list")]
    pub states: Vec<CMatrix>,
}

/// A finite POVM in density form: elements `m_j` with weights `μ_j`, so that
/// `Σ_j m_j μ_j = I`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretePOVM {
    #[serde(with = "cmatrix_list")]
    pub elements: Vec<CMatrix>,
    pub weights: Vec<f64>,
}

mod cmatrix_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &[CMatrix],
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for m in v {
            seq.serialize_element(&codec::MatrixJson::from_matrix(m))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<CMatrix>, D::Error> {
        let items = Vec::<codec::MatrixJson>::deserialize(de)?;
        items
            .iter()
            .map(|j| j.to_matrix().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl DiscreteEnsemble {
    pub fn new(probs: Vec<f64>, states: Vec<CMatrix>) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(Error::InvalidInput(format!(
                "got {} probabilities and {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidInput("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        let d = states[0].nrows();
        for (i, rho) in states.iter().enumerate() {
            if rho.nrows() != d || rho.ncols() != d {
                return Err(Error::InvalidInput(format!("state {i} has inconsistent dimension")));
            }
            if linalg::hermiticity_defect(rho) > 1e-10 {
                return Err(Error::InvalidInput(format!("state {i} is not Hermitian")));
            }
            if (rho.trace().re - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "state {i} has trace {:.12}, expected 1 within 1e-10",
                    rho.trace().re
                )));
            }
            if linalg::min_eigenvalue(rho) < -1e-10 {
                return Err(Error::InvalidInput(format!("state {i} is not PSD")));
            }
        }
        Ok(DiscreteEnsemble { probs, states })
    }

    pub fn dim(&self) -> usize {
        self.states[0].nrows()
    }

    /// Average state `ρ̄ = Σ p_i ρ_i`.
    pub fn average_state(&self) -> CMatrix {
        let d = self.dim();
        let mut avg = CMatrix::zeros(d, d);
        for (p, rho) in self.probs.iter().zip(&self.states) {
            avg += rho * Complex64::new(*p, 0.0);
        }
        avg
    }
}

impl DiscretePOVM {
    /// Validate a complete POVM: `Σ m_j μ_j = I` within 1e-10 (Frobenius).
    pub fn new(elements: Vec<CMatrix>, weights: Vec<f64>) -> Result<Self> {
        let povm = Self::with_defect(elements, weights)?;
        let defect = povm.completeness_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "POVM completeness defect {:.3e} exceeds 1e-10",
                defect
            )));
        }
        Ok(povm)
    }

    /// Wrap POVM data without enforcing completeness. Used for discretized
    /// measurements where the resolution of identity carries a reported
    /// truncation defect.
    pub fn with_defect(elements: Vec<CMatrix>, weights: Vec<f64>) -> Result<Self> {
        if elements.is_empty() || elements.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "got {} elements and {} weights",
                elements.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        let d = elements[0].nrows();
        for (j, m) in elements.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::InvalidInput(format!("element {j} has inconsistent dimension")));
            }
            if linalg::hermiticity_defect(m) > 1e-10 {
                return Err(Error::InvalidInput(format!("element {j} is not Hermitian")));
            }
            if linalg::min_eigenvalue(m) < -1e-10 {
                return Err(Error::InvalidInput(format!("element {j} is not PSD")));
            }
        }
        Ok(DiscretePOVM { elements, weights })
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Frobenius norm of `Σ m_j μ_j - I`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let mut total = CMatrix::zeros(d, d);
        for (m, w) in self.elements.iter().zip(&self.weights) {
            total += m * Complex64::new(*w, 0.0);
        }
        (total - CMatrix::identity(d, d)).norm()
    }
}

/// Joint input/outcome distribution `P[i][j] = p_i Tr(ρ_i m_j) μ_j`.
#[derive(Debug, Clone, Serialize)]
pub struct JointDistribution {
    pub matrix: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let mut total = 0.0;
        let mut clipped = matrix;
        for row in &mut clipped {
            for p in row.iter_mut() {
                if *p < -1e-14 {
                    return Err(Error::InvalidInput(format!(
                        "joint distribution has negative entry {:.3e}",
                        p
                    )));
                }
                *p = p.max(0.0);
                total += *p;
            }
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "joint distribution sums to {total}, expected 1 within 1e-10"
            )));
        }
        Ok(JointDistribution { matrix: clipped })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let cols = self.matrix[0].len();
        let mut out = vec![0.0; cols];
        for row in &self.matrix {
            for (j, p) in row.iter().enumerate() {
                out[j] += p;
            }
        }
        out
    }
}

/// Diagnostics accompanying a finite dual pair.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DualPairDiagnostics {
    /// Outcomes dropped because `Tr(ρ̄ m_j) ≈ 0` (they carry no probability).
    pub dropped_outcomes: Vec<usize>,
    /// Total dual prior mass before renormalization (1 for a complete POVM).
    pub prior_mass: f64,
    /// `‖Σ_i M'_i - I‖_F` after the kernel extension.
    pub dual_completeness_defect: f64,
    /// Rank deficiency of the average state at the `PINV_TOL` threshold.
    pub kernel_dim: usize,
}

/// Dual pair of a finite ensemble and POVM.
///
/// Dual ensemble: `π'_j = Tr(ρ̄ m_j) μ_j`, `ρ'_j = ρ̄^{1/2} m_j ρ̄^{1/2} /
/// Tr(ρ̄ m_j)`. Dual POVM: `M'_i = p_i ρ̄^{-1/2} ρ_i ρ̄^{-1/2}` with the
/// generalized inverse taken on `ker(ρ̄)⊥` and each element extended by
/// `p_i · P_ker` so that `Σ_i M'_i = I` exactly. The extension is one valid
/// choice of the kernel behaviour; it carries no outcome probability because
/// the dual states are supported on `ran ρ̄`.
pub fn dual_pair_finite(
    ens: &DiscreteEnsemble,
    povm: &DiscretePOVM,
) -> Result<(DiscreteEnsemble, DiscretePOVM, DualPairDiagnostics)> {
    if ens.dim() != povm.dim() {
        return Err(Error::InvalidInput(format!(
            "ensemble dimension {} does not match POVM dimension {}",
            ens.dim(),
            povm.dim()
        )));
    }
    let d = ens.dim();
    let avg = ens.average_state();
    let eig = linalg::eigh(&avg);
    let lam_max = eig.max();
    let tol = PINV_TOL * lam_max;
    let sqrt = eig.map(|l| l.max(0.0).sqrt());
    let inv_sqrt = eig.map(|l| if l > tol { 1.0 / l.sqrt() } else { 0.0 });
    let kernel = eig.map(|l| if l > tol { 0.0 } else { 1.0 });
    let kernel_dim = eig.values.iter().filter(|&&l| l <= tol).count();

    let mut dual_probs = Vec::new();
    let mut dual_states = Vec::new();
    let mut dropped = Vec::new();
    for (j, (m, &w)) in povm.elements.iter().zip(&povm.weights).enumerate() {
        let hit = (&avg * m).trace().re;
        if hit <= 1e-14 {
            dropped.push(j);
            continue;
        }
        dual_probs.push(hit * w);
        let state = &sqrt * m * &sqrt / Complex64::new(hit, 0.0);
        dual_states.push(linalg::hermitian_part(&state));
    }
    if dual_probs.is_empty() {
        return Err(Error::InvalidInput(
            "every POVM outcome has zero probability on the average state".into(),
        ));
    }
    let prior_mass: f64 = dual_probs.iter().sum();
    for p in &mut dual_probs {
        *p /= prior_mass;
    }

    let mut dual_elements = Vec::with_capacity(ens.states.len());
    for (p, rho) in ens.probs.iter().zip(&ens.states) {
        let core = &inv_sqrt * rho * &inv_sqrt;
        let elem = (core + &kernel) * Complex64::new(*p, 0.0);
        dual_elements.push(linalg::hermitian_part(&elem));
    }
    let mut total = CMatrix::zeros(d, d);
    for e in &dual_elements {
        total += e;
    }
    let dual_completeness_defect = (&total - CMatrix::identity(d, d)).norm();

    let dual_ens = DiscreteEnsemble::new(dual_probs, dual_states)?;
    let dual_povm = DiscretePOVM::with_defect(dual_elements, vec![1.0; ens.states.len()])?;
    Ok((
        dual_ens,
        dual_povm,
        DualPairDiagnostics {
            dropped_outcomes: dropped,
            prior_mass,
            dual_completeness_defect,
            kernel_dim,
        },
    ))
}

/// Joint distribution of the pair: `P[i][j] = p_i Tr(ρ_i m_j) μ_j`.
pub fn joint_distribution(ens: &DiscreteEnsemble, povm: &DiscretePOVM) -> Result<JointDistribution> {
    if ens.dim() != povm.dim() {
        return Err(Error::InvalidInput(format!(
            "ensemble dimension {} does not match POVM dimension {}",
            ens.dim(),
            povm.dim()
        )));
    }
    let matrix = ens
        .probs
        .iter()
        .zip(&ens.states)
        .map(|(p, rho)| {
            povm.elements
                .iter()
                .zip(&povm.weights)
                .map(|(m, w)| p * (rho * m).trace().re * w)
                .collect()
        })
        .collect();
    JointDistribution::new(matrix)
}

/// Mutual information `Σ_ij P_ij ln(P_ij / (r_i c_j))` in nats, with
/// `0 ln 0 = 0`.
pub fn mutual_information_discrete(joint: &JointDistribution) -> f64 {
    let rows = joint.row_sums();
    let cols = joint.col_sums();
    let mut info = 0.0;
    for (i, row) in joint.matrix.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                info += p * (p / (rows[i] * cols[j])).ln();
            }
        }
    }
    info
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::HermitianMatrix;

    fn herm1(x: f64) -> HermitianMatrix {
        HermitianMatrix::from_diagonal(&[x])
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_dual_values() {
        let ens = GaussianEnsemble::new(herm1(1.0), herm1(1.0)).unwrap();
        let dual = dual_gaussian_observable(&ens).unwrap();
        assert!((dual.sigma_tilde.as_matrix()[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((dual.dual_noise.as_matrix()[(0, 0)].re - 3.0).abs() < 1e-12);
        assert!((dual.rescale[(0, 0)].re - 6.0_f64.sqrt()).abs() < 1e-12);

        let id = verify_capacity_identity(&ens).unwrap();
        assert!((id.lhs - 1.5).abs() < 1e-12);
        assert!((id.rhs - 1.5).abs() < 1e-12);
        assert!(id.residual < 1e-12);
        assert!(id.similarity_defect < 1e-12);
    }

    #[test]
    fn isotropic_two_mode_identity() {
        let a = 0.8;
        let b = 1.7;
        let ens = GaussianEnsemble::new(
            HermitianMatrix::from_diagonal(&[a, a]),
            HermitianMatrix::from_diagonal(&[b, b]),
        )
        .unwrap();
        let id = verify_capacity_identity(&ens).unwrap();
        let want = (1.0 + a / (b + 1.0)).powi(2);
        assert!((id.lhs - want).abs() < 1e-12);
        assert!((id.rhs - want).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ensemble_is_rejected() {
        let ens = GaussianEnsemble::new(herm1(1.0), herm1(1e-12)).unwrap();
        match dual_gaussian_observable(&ens) {
            Err(Error::UnsupportedInput(_)) => {}
            other => panic!("expected unsupported-input, got {other:?}"),
        }
    }

    fn ket(entries: &[Complex64]) -> CMatrix {
        let d = entries.len();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = entries[i] * entries[j].conj();
            }
        }
        m
    }

    #[test]
    fn qubit_conjugate_bases_dual_pair() {
        // Ensemble {1/2 |0><0|, 1/2 |1><1|}, POVM {|+><+|, |-><-|}.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = ket(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let one = ket(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let plus = ket(&[c(s, 0.0), c(s, 0.0)]);
        let minus = ket(&[c(s, 0.0), c(-s, 0.0)]);
        let ens = DiscreteEnsemble::new(vec![0.5, 0.5], vec![zero.clone(), one.clone()]).unwrap();
        let povm = DiscretePOVM::new(vec![plus.clone(), minus.clone()], vec![1.0, 1.0]).unwrap();

        let (dual_ens, dual_povm, diag) = dual_pair_finite(&ens, &povm).unwrap();
        assert!(diag.dropped_outcomes.is_empty());
        assert!((diag.prior_mass - 1.0).abs() < 1e-12);
        assert!(diag.dual_completeness_defect < 1e-12);

        assert!((dual_ens.probs[0] - 0.5).abs() < 1e-12);
        assert!((&dual_ens.states[0] - &plus).norm() < 1e-12);
        assert!((&dual_ens.states[1] - &minus).norm() < 1e-12);
        assert!((&dual_povm.elements[0] - &zero).norm() < 1e-12);
        assert!((&dual_povm.elements[1] - &one).norm() < 1e-12);

        let joint = joint_distribution(&ens, &povm).unwrap();
        for row in &joint.matrix {
            for &p in row {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
        assert!(mutual_information_discrete(&joint).abs() < 1e-12);
    }

    #[test]
    fn single_state_identity_povm() {
        let zero = ket(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let ens = DiscreteEnsemble::new(vec![1.0], vec![zero.clone()]).unwrap();
        let povm = DiscretePOVM::new(vec![CMatrix::identity(2, 2)], vec![1.0]).unwrap();
        let (dual_ens, dual_povm, _) = dual_pair_finite(&ens, &povm).unwrap();
        assert!((&dual_ens.states[0] - &zero).norm() < 1e-12);
        assert!((dual_ens.probs[0] - 1.0).abs() < 1e-15);
        // |0><0| has a kernel; the dual element is extended there to reach I.
        assert!((&dual_povm.elements[0] - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn perfectly_correlated_information() {
        let joint =
            JointDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information_discrete(&joint) - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn product_distribution_information_vanishes() {
        let joint =
            JointDistribution::new(vec![vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
        assert!(mutual_information_discrete(&joint).abs() < 1e-14);
    }
}
