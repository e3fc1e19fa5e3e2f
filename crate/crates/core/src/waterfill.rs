//! Energy-constrained classical capacity `C(𝓜; H, E)`.
//!
//! For a diagonal Hamiltonian `H = Σ ω_j a_j†a_j` and diagonal noise
//! `N = diag(n_j)` the optimum is the water-filling allocation
//! `s_j = (ν/ω_j - n_j - 1)₊` with the water level `ν` fixed by the budget
//! `Σ ω_j s_j = E`, giving `C = Σ ln(1 + s_j/(n_j+1))`. When the Hamiltonian
//! matrix and the noise commute, the problem reduces to that closed form in
//! the common eigenbasis; otherwise the concave objective
//! `ln det(I + (N+I)⁻¹Σ)` is maximized over `{Σ ⪰ 0, Sp(εΣ) ≤ E}` by
//! projected gradient ascent.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::HermitianMatrix;
use crate::linalg::{self, CMatrix};

/// Quadratic gauge-invariant energy constraint `Sp(εΣ) ≤ E`.
#[derive(Debug, Clone)]
pub struct EnergyConstraint {
    hamiltonian: HermitianMatrix,
    budget: f64,
}

impl EnergyConstraint {
    pub fn new(hamiltonian: HermitianMatrix, budget: f64) -> Result<Self> {
        if hamiltonian.min_eigenvalue() <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "Hamiltonian matrix must be positive definite (min eigenvalue {:.3e})",
                hamiltonian.min_eigenvalue()
            )));
        }
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::InvalidInput(format!(
                "energy budget must be positive and finite, got {budget}"
            )));
        }
        Ok(EnergyConstraint {
            hamiltonian,
            budget,
        })
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

/// Water-filling solution in the diagonal case.
#[derive(Debug, Clone, Serialize)]
pub struct WaterfillResult {
    /// Water level ν.
    pub water_level: f64,
    /// Per-mode photon allocations `s_j ≥ 0`.
    pub allocations: Vec<f64>,
    /// Capacity `Σ ln(1 + s_j/(n_j+1))` in nats.
    pub capacity: f64,
}

impl WaterfillResult {
    /// Indices of modes with nonzero allocation.
    pub fn active_modes(&self) -> Vec<usize> {
        self.allocations
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Residual tolerance on the budget equation when solving for ν.
const BUDGET_TOL: f64 = 1e-12;

/// Solve `Σ_j ω_j (ν/ω_j - n_j - 1)₊ = E` for the smallest such ν and return
/// the allocation and capacity.
pub fn waterfill_diagonal(freqs: &[f64], noise_diag: &[f64], budget: f64) -> Result<WaterfillResult> {
    if freqs.is_empty() || freqs.len() != noise_diag.len() {
        return Err(Error::InvalidInput(format!(
            "got {} frequencies and {} noise entries",
            freqs.len(),
            noise_diag.len()
        )));
    }
    if freqs.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput("frequencies must be positive".into()));
    }
    if noise_diag.iter().any(|&n| n < 0.0 || !n.is_finite()) {
        return Err(Error::InvalidInput("noise entries must be nonnegative".into()));
    }
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::InvalidInput(format!(
            "energy budget must be positive and finite, got {budget}"
        )));
    }

    // Cutoffs c_j = ω_j (n_j + 1); the budget function Σ (ν - c_j)₊ is
    // piecewise linear and nondecreasing, so bisection is safe.
    let cutoffs: Vec<f64> = freqs
        .iter()
        .zip(noise_diag)
        .map(|(&w, &n)| w * (n + 1.0))
        .collect();
    let spent = |nu: f64| -> f64 { cutoffs.iter().map(|&c| (nu - c).max(0.0)).sum() };

    let c_min = cutoffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_max = cutoffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w_min = freqs.iter().cloned().fold(f64::INFINITY, f64::min);
    let w_max = freqs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = c_min;
    let mut margin = budget * w_max / w_min;
    let mut hi = c_max + margin;
    // Rounding can leave spent(hi) marginally below the budget; widen.
    while spent(hi) < budget {
        margin *= 2.0;
        hi = c_max + margin;
    }
    let scale = budget.max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spent(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let mut nu = hi;
    let mut allocations: Vec<f64> = freqs
        .iter()
        .zip(&cutoffs)
        .map(|(&w, &c)| (nu - c).max(0.0) / w)
        .collect();

    // Refine ν exactly on the detected active set, and recompute the active
    // allocations in a cancellation-free form:
    //   ν - c_j = (E + Σ_{k∈A}(c_k - c_j)) / |A| .
    // Falls back to the plain bisection value if the set is inconsistent
    // (a cutoff grazing the water level).
    let active: Vec<usize> = (0..cutoffs.len()).filter(|&j| nu > cutoffs[j]).collect();
    if !active.is_empty() {
        let sum_c: f64 = active.iter().map(|&j| cutoffs[j]).sum();
        let candidate = (budget + sum_c) / active.len() as f64;
        let consistent = (0..cutoffs.len())
            .all(|j| (candidate > cutoffs[j]) == active.contains(&j));
        if consistent {
            nu = candidate;
            for &j in &active {
                let shift: f64 = active.iter().map(|&k| cutoffs[k] - cutoffs[j]).sum();
                allocations[j] = ((budget + shift) / active.len() as f64).max(0.0) / freqs[j];
            }
        }
    }
    let spent_exact: f64 = freqs
        .iter()
        .zip(&allocations)
        .map(|(&w, &s)| w * s)
        .sum();
    if (spent_exact - budget).abs() > BUDGET_TOL * scale {
        return Err(Error::NumericalFailure(format!(
            "water level did not meet the budget (residual {:.3e})",
            (spent_exact - budget).abs()
        )));
    }
    let capacity = allocations
        .iter()
        .zip(noise_diag)
        .map(|(&s, &n)| (s / (n + 1.0)).ln_1p())
        .sum();
    Ok(WaterfillResult {
        water_level: nu,
        allocations,
        capacity,
    })
}

/// Result of the energy-constrained capacity optimization.
#[derive(Debug, Clone)]
pub struct ConstrainedCapacity {
    /// Maximizing input covariance.
    pub optimal_cov: HermitianMatrix,
    /// Capacity in nats.
    pub capacity: f64,
    /// Iterations used by the ascent (0 for the closed-form diagonal path).
    pub iterations: usize,
    /// Water-filling detail when the problem reduced to the diagonal case.
    pub waterfill: Option<WaterfillResult>,
}

const MAX_ITERS: usize = 10_000;
const COMMUTE_TOL: f64 = 1e-10;

/// Energy-constrained classical capacity
/// `sup { ln det(I + (N+I)⁻¹Σ) : Σ ⪰ 0, Sp(εΣ) ≤ E }`.
///
/// Commuting `(ε, N)` reduce to [`waterfill_diagonal`] in the common
/// eigenbasis; otherwise the concave objective is maximized by projected
/// gradient ascent with backtracking, projecting onto the feasible set by
/// alternating (Dykstra) projections. The constraint is active at the
/// optimum since the objective is strictly increasing in Σ.
pub fn constrained_capacity(
    constraint: &EnergyConstraint,
    noise: &HermitianMatrix,
) -> Result<ConstrainedCapacity> {
    let s = noise.dim();
    let eps = constraint.hamiltonian();
    if eps.dim() != s {
        return Err(Error::InvalidInput(format!(
            "Hamiltonian is {}-dimensional but noise is {}-dimensional",
            eps.dim(),
            s
        )));
    }
    let noise = HermitianMatrix::psd(noise.as_matrix().clone())?;
    let budget = constraint.budget();

    let comm = eps.as_matrix() * noise.as_matrix() - noise.as_matrix() * eps.as_matrix();
    let scale = eps.as_matrix().norm() * noise.as_matrix().norm();
    if comm.norm() <= COMMUTE_TOL * scale.max(1.0) {
        return diagonal_case(eps, &noise, budget);
    }
    projected_ascent(eps, &noise, budget)
}

/// Simultaneously diagonalize commuting `(ε, N)` and water-fill there.
fn diagonal_case(
    eps: &HermitianMatrix,
    noise: &HermitianMatrix,
    budget: f64,
) -> Result<ConstrainedCapacity> {
    let s = eps.dim();
    let eig = linalg::eigh(eps.as_matrix());
    let mut basis = eig.vectors.clone();
    let n_rot = basis.adjoint() * noise.as_matrix() * &basis;

    // Within (near-)degenerate eigenvalue clusters of ε the basis is free;
    // rotate each cluster to diagonalize the corresponding block of N.
    let mut j = 0;
    while j < s {
        let mut k = j + 1;
        while k < s && (eig.values[k] - eig.values[j]).abs() <= 1e-8 * eig.values[k].abs().max(1.0)
        {
            k += 1;
        }
        if k - j > 1 {
            let block = n_rot.view((j, j), (k - j, k - j)).into_owned();
            let sub = linalg::eigh(&block);
            let cols = basis.columns(j, k - j).into_owned();
            let rotated = cols * &sub.vectors;
            basis.view_mut((0, j), (s, k - j)).copy_from(&rotated);
        }
        j = k;
    }

    let n_diag_m = basis.adjoint() * noise.as_matrix() * &basis;
    let freqs: Vec<f64> = eig.values.iter().cloned().collect();
    let n_diag: Vec<f64> = (0..s).map(|i| n_diag_m[(i, i)].re.max(0.0)).collect();
    let wf = waterfill_diagonal(&freqs, &n_diag, budget)?;

    let mut d = CMatrix::zeros(s, s);
    for (i, &a) in wf.allocations.iter().enumerate() {
        d[(i, i)] = Complex64::new(a, 0.0);
    }
    let sigma = HermitianMatrix::new(&basis * d * basis.adjoint())?;
    Ok(ConstrainedCapacity {
        optimal_cov: sigma,
        capacity: wf.capacity,
        iterations: 0,
        waterfill: Some(wf),
    })
}

/// Objective `ln det(I + (N+I)⁻¹Σ)` evaluated through the symmetrized form.
fn objective(sigma: &CMatrix, inv_sqrt_base: &CMatrix) -> f64 {
    let m = inv_sqrt_base * sigma * inv_sqrt_base;
    linalg::eigh(&m)
        .values
        .iter()
        .map(|l| l.max(0.0).ln_1p())
        .sum()
}

/// Frobenius projection onto `{Σ ⪰ 0, Sp(εΣ) ≤ E}` by Dykstra's alternating
/// projections between the PSD cone and the energy halfspace.
fn project_feasible(x: &CMatrix, eps: &CMatrix, eps_norm_sq: f64, budget: f64) -> CMatrix {
    let halfspace = |m: &CMatrix| -> CMatrix {
        let spent = (eps * m).trace().re;
        if spent <= budget {
            m.clone()
        } else {
            m - eps * Complex64::new((spent - budget) / eps_norm_sq, 0.0)
        }
    };
    let mut y = x.clone();
    let mut p = CMatrix::zeros(x.nrows(), x.ncols());
    let mut q = CMatrix::zeros(x.nrows(), x.ncols());
    for _ in 0..200 {
        let a = linalg::psd_projection(&(&y + &p));
        let p_new = &y + &p - &a;
        let b = halfspace(&(&a + &q));
        let q_new = &a + &q - &b;
        let delta = (&b - &y).norm();
        y = b;
        p = p_new;
        q = q_new;
        if delta <= 1e-14 * y.norm().max(1.0) {
            break;
        }
    }
    y
}

fn projected_ascent(
    eps: &HermitianMatrix,
    noise: &HermitianMatrix,
    budget: f64,
) -> Result<ConstrainedCapacity> {
    let s = eps.dim();
    let base = noise.plus_identity(1.0);
    let inv_sqrt_base = linalg::inv_sqrt_pd(base.as_matrix())?;
    let eps_m = eps.as_matrix().clone();
    let eps_norm_sq = (&eps_m * &eps_m).trace().re;

    // Feasible start on the constraint boundary.
    let trace_eps = eps_m.trace().re;
    let mut sigma = CMatrix::identity(s, s) * Complex64::new(budget / trace_eps, 0.0);
    let mut value = objective(&sigma, &inv_sqrt_base);

    let mut step = 1.0_f64;
    let mut stalled = 0;
    for iter in 0..MAX_ITERS {
        let grad = linalg::inv_pd(&(&sigma + base.as_matrix()))?;
        let mut improved = false;
        // Backtrack from the current step; grow it again after a clean accept.
        for _ in 0..60 {
            let cand = project_feasible(
                &(&sigma + &grad * Complex64::new(step, 0.0)),
                &eps_m,
                eps_norm_sq,
                budget,
            );
            let cand_value = objective(&cand, &inv_sqrt_base);
            if cand_value > value {
                let gain = cand_value - value;
                sigma = cand;
                value = cand_value;
                improved = true;
                step = (step * 1.5).min(1e6);
                if gain <= 1e-14 * value.abs().max(1.0) {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
        if !improved || stalled >= 3 {
            let optimal_cov = HermitianMatrix::psd(linalg::hermitian_part(&sigma))?;
            return Ok(ConstrainedCapacity {
                optimal_cov,
                capacity: value,
                iterations: iter + 1,
                waterfill: None,
            });
        }
    }

    let best = ConstrainedCapacity {
        optimal_cov: HermitianMatrix::psd(linalg::hermitian_part(&sigma))?,
        capacity: value,
        iterations: MAX_ITERS,
        waterfill: None,
    };
    Err(Error::NonConvergence {
        iterations: MAX_ITERS,
        best_value: value,
        best: Box::new(best),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_mode_splits_evenly() {
        let wf = waterfill_diagonal(&[1.0, 1.0], &[0.0, 0.0], 2.0).unwrap();
        assert!((wf.water_level - 2.0).abs() < 1e-12);
        assert!((wf.allocations[0] - 1.0).abs() < 1e-12);
        assert!((wf.allocations[1] - 1.0).abs() < 1e-12);
        assert!((wf.capacity - 2.0 * 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_mode_small_budget() {
        let e = 1e-6;
        let wf = waterfill_diagonal(&[1.0], &[0.0], e).unwrap();
        assert!((wf.allocations[0] - e).abs() < 1e-18);
        assert!((wf.capacity - e.ln_1p()).abs() < 1e-18);
    }

    #[test]
    fn expensive_mode_stays_inactive() {
        let wf = waterfill_diagonal(&[1.0, 10.0], &[0.0, 0.0], 1.0).unwrap();
        assert!((wf.water_level - 2.0).abs() < 1e-12);
        assert!((wf.allocations[0] - 1.0).abs() < 1e-12);
        assert_eq!(wf.allocations[1], 0.0);
        assert_eq!(wf.active_modes(), vec![0]);
    }

    #[test]
    fn kkt_conditions_hold() {
        let freqs = [0.7, 1.3, 2.9];
        let noise = [0.2, 1.4, 0.05];
        let budget = 3.7;
        let wf = waterfill_diagonal(&freqs, &noise, budget).unwrap();
        let spent: f64 = freqs
            .iter()
            .zip(&wf.allocations)
            .map(|(w, s)| w * s)
            .sum();
        assert!((spent - budget).abs() < 1e-9);
        for j in 0..freqs.len() {
            if wf.allocations[j] > 0.0 {
                let kkt = wf.water_level / freqs[j] - noise[j] - 1.0 - wf.allocations[j];
                assert!(kkt.abs() < 1e-9, "mode {j}: {kkt}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(waterfill_diagonal(&[0.0], &[0.0], 1.0).is_err());
        assert!(waterfill_diagonal(&[1.0], &[-0.1], 1.0).is_err());
        assert!(waterfill_diagonal(&[1.0], &[0.0], 0.0).is_err());
        assert!(waterfill_diagonal(&[1.0, 1.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn commuting_case_matches_direct_waterfill() {
        let eps = HermitianMatrix::from_diagonal(&[1.0, 1.0]);
        let noise = HermitianMatrix::zeros(2);
        let constraint = EnergyConstraint::new(eps, 2.0).unwrap();
        let got = constrained_capacity(&constraint, &noise).unwrap();
        assert!((got.capacity - 2.0 * 2.0_f64.ln()).abs() < 1e-12);
        let sigma = got.optimal_cov.as_matrix();
        assert!((sigma[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!((sigma[(1, 1)].re - 1.0).abs() < 1e-10);
        assert!(got.waterfill.is_some());
    }

    #[test]
    fn single_mode_uses_whole_budget() {
        let eps = HermitianMatrix::from_diagonal(&[1.0]);
        let n = 0.6;
        let e = 1.9;
        let constraint = EnergyConstraint::new(eps, e).unwrap();
        let got = constrained_capacity(&constraint, &HermitianMatrix::from_diagonal(&[n])).unwrap();
        assert!((got.capacity - (e / (n + 1.0)).ln_1p()).abs() < 1e-12);
        assert!((got.optimal_cov.as_matrix()[(0, 0)].re - e).abs() < 1e-10);
    }

    #[test]
    fn constraint_active_for_noncommuting_inputs() {
        let eps = HermitianMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.2, -0.1),
                Complex64::new(1.7, 0.0),
            ],
        ))
        .unwrap();
        let noise = HermitianMatrix::from_diagonal(&[0.1, 0.8]);
        let budget = 2.3;
        let constraint = EnergyConstraint::new(eps.clone(), budget).unwrap();
        let got = constrained_capacity(&constraint, &noise).unwrap();
        let spent = (eps.as_matrix() * got.optimal_cov.as_matrix()).trace().re;
        assert!((spent - budget).abs() < 1e-6, "spent {spent} of {budget}");
        assert!(got.optimal_cov.min_eigenvalue() > -1e-12);
    }
}
