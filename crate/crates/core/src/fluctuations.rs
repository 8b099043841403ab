//! Static fluctuation theory of the two canonical pairs.
//!
//! Total pair: number fluctuation F_k(n_tot) and phase fluctuation
//! F_k(φ_tot), commutator scalar √ρ0. Relative pair: F(n_rel) and the
//! relative current F(j_rel), commutator scalar c_rel, with the virial
//! relation Var(n_rel) = (2γ)² Var(j_rel). Only second moments are computed.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::model::{bose, dispersion, Beta, ModelParams, Momentum};
use crate::numerics::{adaptive_quad, QuadratureSpec};

/// coth(x/2)-type factor 2n(x) + 1 for x = βE > 0.
fn coth_half(x: f64) -> f64 {
    1.0 / (0.5 * x).tanh()
}

/// coth(βγ), equal to one in the ground state.
fn gap_coth(params: &ModelParams) -> f64 {
    match params.beta() {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => coth_half(2.0 * b * params.gamma()),
    }
}

/// Pair-fluctuation kernel of one mode pair with reduced energies a, b > 0:
/// n(a)(1 + n(b)) + n(b)(1 + n(a)) = (e^a + e^b)/((e^a − 1)(e^b − 1)).
#[inline]
pub fn pair_kernel(a: f64, b: f64) -> f64 {
    let na = bose(a);
    let nb = bose(b);
    na + nb + 2.0 * na * nb
}

/// Both sides of the per-mode virial identity for b > a > 0:
/// n(a) + n(b) + 2n(a)n(b) = (n(a) − n(b)) coth((b − a)/2).
pub fn virial_kernel_sides(a: f64, b: f64) -> (f64, f64) {
    let lhs = pair_kernel(a, b);
    let rhs = (bose(a) - bose(b)) * coth_half(b - a);
    (lhs, rhs)
}

fn require_nonzero_k(k: &Momentum) -> Result<()> {
    if k.is_zero() {
        Err(Error::domain(
            "k = 0 total-pair variances diverge at finite temperature; they exist only in the ground state",
        ))
    } else {
        Ok(())
    }
}

/// Var F_k(φ_tot) = (1/2) coth(βε_k/2); 1/2 in the ground state.
pub fn total_phase_variance(params: &ModelParams, k: &Momentum) -> Result<f64> {
    match params.beta() {
        Beta::Infinite => Ok(0.5),
        Beta::Finite(b) => {
            require_nonzero_k(k)?;
            Ok(0.5 * coth_half(b * dispersion(params, k)))
        }
    }
}

/// Relative tolerance of the outer (radial) integration in
/// [`total_number_variance`].
pub const NUMBER_VARIANCE_REL_TOL: f64 = 1e-7;

/// (1/2)∫d³p/(2π)³ K(βE_p, βE_{p+k}) for one branch with E_p = ε_p + shift,
/// reduced to |p| and u = 1 + cos θ.
fn branch_pair_integral(params: &ModelParams, beta: f64, shift: f64, k: f64) -> Result<f64> {
    let two_m = 2.0 * params.mass();
    let inner_spec = QuadratureSpec::default()
        .with_rel_tol(1e-10)
        .with_abs_tol(1e-300);
    let outer_spec = QuadratureSpec::default()
        .with_rel_tol(NUMBER_VARIANCE_REL_TOL)
        .with_abs_tol(1e-300);
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    let radial = |p: f64| -> f64 {
        if failure.borrow().is_some() {
            return f64::NAN;
        }
        let a = beta * (p * p / two_m + shift);
        let angular = |u: f64| {
            // |p + k|² = (p − k)² + 2pk(1 + cos θ)
            let q2 = (p - k) * (p - k) + 2.0 * p * k * u;
            pair_kernel(a, beta * (q2 / two_m + shift))
        };
        match adaptive_quad(angular, 0.0, 2.0, &inner_spec) {
            Ok(r) => p * p * r.value,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };

    let run = |lo: f64, hi: f64| -> Result<f64> {
        match adaptive_quad(radial, lo, hi, &outer_spec) {
            Ok(r) => Ok(r.value),
            Err(e) => Err(failure.borrow_mut().take().unwrap_or(e)),
        }
    };
    // the integrand has an integrable singularity at |p| = |k| (p + k = 0)
    let total = run(0.0, k)? + run(k, f64::INFINITY)?;
    Ok(total / (8.0 * PI * PI))
}

/// Var F_k(n_tot): condensate term (ρ0/2) coth(βε_k/2) plus the pair
/// integrals of both branches; ρ0/2 in the ground state.
pub fn total_number_variance(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    k: &Momentum,
) -> Result<f64> {
    let beta = match params.beta() {
        Beta::Infinite => return Ok(0.5 * sol.rho0),
        Beta::Finite(b) => b,
    };
    require_nonzero_k(k)?;
    let g = params.gamma();
    let eps_k = dispersion(params, k);
    let condensate = 0.5 * sol.rho0 * coth_half(beta * eps_k);
    let minus = branch_pair_integral(params, beta, sol.delta - g, k.norm())?;
    let plus = branch_pair_integral(params, beta, sol.delta + g, k.norm())?;
    Ok(condensate + minus + plus)
}

/// [F(n_tot), F(φ_tot)] = i√ρ0; the scalar √ρ0.
pub fn total_commutator_scalar(sol: &EquilibriumSolution) -> f64 {
    sol.rho0.sqrt()
}

/// Ground-state uncertainty product Var(n_tot)·Var(φ_tot) = (ρ0/2)(1/2).
pub fn uncertainty_product_ground(sol: &EquilibriumSolution) -> f64 {
    (0.5 * sol.rho0) * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalPairReport {
    pub k: Momentum,
    pub var_n_tot: f64,
    pub var_phi_tot: f64,
    pub commutator_scalar: f64,
    pub uncertainty_product: f64,
}

pub fn total_pair_report(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    k: &Momentum,
) -> Result<TotalPairReport> {
    let var_n_tot = total_number_variance(params, sol, k)?;
    let var_phi_tot = total_phase_variance(params, k)?;
    Ok(TotalPairReport {
        k: *k,
        var_n_tot,
        var_phi_tot,
        commutator_scalar: total_commutator_scalar(sol),
        uncertainty_product: var_n_tot * var_phi_tot,
    })
}

/// ρ0 + ρ(δ−γ) − ρ(δ+γ), i.e. γ·c_rel. In the normal phase this is the
/// thermal remainder only.
fn zero_mode_imbalance(sol: &EquilibriumSolution) -> f64 {
    sol.rho0 + sol.rho_th_minus - sol.rho_th_plus
}

/// c_rel = (ρ0 + ρ(0) − ρ(2γ))/γ.
pub fn relative_commutator_scalar(params: &ModelParams, sol: &EquilibriumSolution) -> f64 {
    zero_mode_imbalance(sol) / params.gamma()
}

/// Duhamel two-point function of F(n_rel), c_rel/β; `None` in the ground state.
pub fn duhamel_two_point(params: &ModelParams, sol: &EquilibriumSolution) -> Option<f64> {
    params
        .beta()
        .value()
        .map(|b| relative_commutator_scalar(params, sol) / b)
}

/// Var F(n_rel) = c_rel γ coth(βγ); ρ0 in the ground state.
pub fn relative_number_variance(params: &ModelParams, sol: &EquilibriumSolution) -> f64 {
    zero_mode_imbalance(sol) * gap_coth(params)
}

/// Var F(j_rel) = Var F(n_rel)/(2γ)².
pub fn relative_current_variance(params: &ModelParams, sol: &EquilibriumSolution) -> f64 {
    let two_gamma = 2.0 * params.gamma();
    relative_number_variance(params, sol) / (two_gamma * two_gamma)
}

/// Zero-mode part of the relative current against the relative phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativePhaseReport {
    /// Var F(φ_rel) = (1/4) coth(βγ).
    pub var_phi_rel: f64,
    /// √ρ0/γ in F(j⁰_rel) = (√ρ0/γ) F(φ_rel).
    pub link_coefficient: f64,
    /// Var F(j⁰_rel) = link² Var F(φ_rel) = (ρ0/4γ²) coth(βγ).
    pub j0_variance: f64,
}

pub fn relative_phase_report(
    params: &ModelParams,
    sol: &EquilibriumSolution,
) -> Result<RelativePhaseReport> {
    if !sol.condensed || sol.rho0 <= 0.0 {
        return Err(Error::Degenerate(
            "relative phase link needs a non-empty condensate (rho0 > 0)".into(),
        ));
    }
    let var_phi_rel = 0.25 * gap_coth(params);
    let link_coefficient = sol.rho0.sqrt() / params.gamma();
    Ok(RelativePhaseReport {
        var_phi_rel,
        link_coefficient,
        j0_variance: link_coefficient * link_coefficient * var_phi_rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativePairReport {
    pub c_rel: f64,
    pub duhamel_nn: Option<f64>,
    pub var_n_rel: f64,
    pub var_j_rel: f64,
    pub var_phi_rel: f64,
    pub phase_link_coefficient: f64,
    /// False in the normal phase, where the values are the thermal remainder
    /// with ρ0 = 0.
    pub condensed_regime: bool,
}

pub fn relative_pair_report(params: &ModelParams, sol: &EquilibriumSolution) -> RelativePairReport {
    RelativePairReport {
        c_rel: relative_commutator_scalar(params, sol),
        duhamel_nn: duhamel_two_point(params, sol),
        var_n_rel: relative_number_variance(params, sol),
        var_j_rel: relative_current_variance(params, sol),
        var_phi_rel: 0.25 * gap_coth(params),
        phase_link_coefficient: sol.rho0.sqrt() / params.gamma(),
        condensed_regime: sol.condensed && sol.rho0 > 0.0,
    }
}

/// Relative threshold below which two fluctuation operators count as equal.
pub const COARSE_GRAIN_EQUALITY: f64 = 1e-10;
/// Relative amount by which a distance may dip below zero from rounding.
pub const COARSE_GRAIN_NEGATIVE_SLACK: f64 = 1e-12;

/// Var F(A − B) = Var A + Var B − 2⟨AB⟩_sym.
pub fn coarse_grain_distance(var_a: f64, var_b: f64, cross_symmetrized: f64) -> Result<f64> {
    let d = var_a + var_b - 2.0 * cross_symmetrized;
    let scale = var_a.abs().max(var_b.abs());
    if d < 0.0 {
        if d < -COARSE_GRAIN_NEGATIVE_SLACK * scale {
            return Err(Error::Consistency {
                quantity: "coarse-grain distance".into(),
                detail: format!(
                    "negative variance {d:e} (moments {var_a:e}, {var_b:e}, {cross_symmetrized:e})"
                ),
            });
        }
        return Ok(0.0);
    }
    Ok(d)
}

/// Whether a distance identifies the two operators.
pub fn coarse_grain_equal(distance: f64, var_a: f64, var_b: f64) -> bool {
    distance < COARSE_GRAIN_EQUALITY * var_a.abs().max(var_b.abs())
}

/// Var[F(j⁰_rel) − (√ρ0/γ)F(φ_rel)]; zero at every temperature.
pub fn condensate_current_phase_distance(
    params: &ModelParams,
    sol: &EquilibriumSolution,
) -> Result<f64> {
    let report = relative_phase_report(params, sol)?;
    let link = report.link_coefficient;
    // ⟨F(j⁰)F(φ)⟩ = ⟨F(φ)F(j⁰)⟩ = (√ρ0/4γ) coth(βγ)
    let cross = sol.rho0.sqrt() / (4.0 * params.gamma()) * gap_coth(params);
    coarse_grain_distance(
        report.j0_variance,
        link * link * report.var_phi_rel,
        link * cross,
    )
}

/// Var[F(j_rel) − F(j⁰_rel)]. The non-zero modes of j_rel are uncorrelated
/// with the zero mode, so the cross moment is Var F(j⁰_rel). Vanishes only in
/// the ground state.
pub fn current_zero_mode_distance(params: &ModelParams, sol: &EquilibriumSolution) -> Result<f64> {
    let var_j = relative_current_variance(params, sol);
    let var_j0 = relative_phase_report(params, sol)?.j0_variance;
    coarse_grain_distance(var_j, var_j0, var_j0)
}
