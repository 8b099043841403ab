//! Equilibrium of the coupled gases: self-consistent chemical potential,
//! condensate density and the one-point functions of the broken-symmetry state
//! (gauge angle fixed to zero).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Beta, ModelParams};
use crate::numerics::{density_series, find_root, rho_alpha};

/// Equilibrium state for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumSolution {
    pub mu: f64,
    /// δ = λρ − μ; exactly γ in the condensed phase.
    pub delta: f64,
    pub rho0: f64,
    pub rho_th_minus: f64,
    pub rho_th_plus: f64,
    pub rho_c: f64,
    pub condensed: bool,
}

impl EquilibriumSolution {
    /// Condensate density plus both thermal densities.
    pub fn total_density(&self) -> f64 {
        self.rho0 + self.rho_th_minus + self.rho_th_plus
    }
}

/// ρ_c = ρ(0) + ρ(2γ); zero in the ground state.
pub fn critical_density(params: &ModelParams) -> Result<f64> {
    if params.beta().is_ground_state() {
        return Ok(0.0);
    }
    Ok(rho_alpha(params, 0.0)?.value + rho_alpha(params, 2.0 * params.gamma())?.value)
}

/// Thermal density of both branches at gap variable δ ≥ γ.
fn branch_densities(params: &ModelParams, delta: f64) -> Result<(f64, f64)> {
    let g = params.gamma();
    let lower = (delta - g).max(0.0);
    Ok((
        density_series(params, lower)?,
        density_series(params, delta + g)?,
    ))
}

/// Largest tolerated relative residual of the density constraint.
pub const DENSITY_RESIDUAL_TOLERANCE: f64 = 1e-10;

pub fn solve_equilibrium(params: &ModelParams) -> Result<EquilibriumSolution> {
    let rho = params.rho();
    let lambda_rho = params.lambda() * rho;
    let gamma = params.gamma();

    let beta = match params.beta() {
        Beta::Infinite => {
            return Ok(EquilibriumSolution {
                mu: lambda_rho - gamma,
                delta: gamma,
                rho0: rho,
                rho_th_minus: 0.0,
                rho_th_plus: 0.0,
                rho_c: 0.0,
                condensed: true,
            })
        }
        Beta::Finite(b) => b,
    };

    let rho_zero = rho_alpha(params, 0.0)?.value;
    let rho_gap = rho_alpha(params, 2.0 * gamma)?.value;
    let rho_c = rho_zero + rho_gap;

    if rho >= rho_c {
        return Ok(EquilibriumSolution {
            mu: lambda_rho - gamma,
            delta: gamma,
            rho0: rho - rho_c,
            rho_th_minus: rho_zero,
            rho_th_plus: rho_gap,
            rho_c,
            condensed: true,
        });
    }

    // Normal phase. Solve in s = sqrt(δ − γ): the density sum has a square-root
    // onset at δ = γ, which is smooth in s.
    let excess = |s: f64| -> f64 {
        match branch_densities(params, gamma + s * s) {
            Ok((lo, hi)) => lo + hi - rho,
            Err(_) => f64::NAN,
        }
    };
    let mut offset = 1.0 / beta;
    let mut grown = 0;
    while excess(offset.sqrt()) > 0.0 {
        offset *= 2.0;
        grown += 1;
        if grown > 200 || !offset.is_finite() {
            return Err(Error::Consistency {
                quantity: "chemical potential".into(),
                detail: format!("could not bracket the density root for rho = {rho}"),
            });
        }
    }
    let s_hi = offset.sqrt();
    let s = find_root(excess, (0.0, s_hi), 1e-16 * s_hi).map_err(|e| Error::Consistency {
        quantity: "chemical potential".into(),
        detail: e.to_string(),
    })?;
    let delta = gamma + s * s;
    let (lo, hi) = branch_densities(params, delta)?;
    let residual = lo + hi - rho;
    if residual.abs() > DENSITY_RESIDUAL_TOLERANCE * rho {
        return Err(Error::Consistency {
            quantity: "chemical potential".into(),
            detail: format!("density residual {residual:e} at delta = {delta}"),
        });
    }
    Ok(EquilibriumSolution {
        mu: lambda_rho - delta,
        delta,
        rho0: 0.0,
        rho_th_minus: lo,
        rho_th_plus: hi,
        rho_c,
        condensed: false,
    })
}

/// One-point functions of the extremal state with gauge angle zero.
///
/// `a1_expectation` and `a2_expectation` are the expectations of the creation
/// operators a*₁ and a*₂; their phases are ±φ/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderParameters {
    pub b_minus_expectation: Complex64,
    pub a1_expectation: Complex64,
    pub a2_expectation: Complex64,
}

pub fn order_parameters(sol: &EquilibriumSolution, params: &ModelParams) -> OrderParameters {
    if !sol.condensed || sol.rho0 <= 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return OrderParameters {
            b_minus_expectation: zero,
            a1_expectation: zero,
            a2_expectation: zero,
        };
    }
    let amplitude = (0.5 * sol.rho0).sqrt();
    let half = 0.5 * params.phi();
    OrderParameters {
        b_minus_expectation: Complex64::new(sol.rho0.sqrt(), 0.0),
        a1_expectation: Complex64::from_polar(amplitude, half),
        a2_expectation: Complex64::from_polar(amplitude, -half),
    }
}

/// Which parameter a phase-diagram sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Rho,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rho: f64,
    pub beta: Beta,
    pub solution: EquilibriumSolution,
}

fn strictly_monotone(grid: &[f64]) -> bool {
    grid.windows(2).all(|w| w[1] > w[0]) || grid.windows(2).all(|w| w[1] < w[0])
}

/// Solves the equilibrium at every grid point. Points are evaluated in
/// parallel and returned in grid order.
pub fn phase_diagram_sweep(
    template: &ModelParams,
    axis: SweepAxis,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "sweep grid is empty"));
    }
    if !strictly_monotone(grid) {
        return Err(Error::invalid(
            "grid",
            "sweep grid must be strictly monotone",
        ));
    }
    let points = grid
        .par_iter()
        .map(|&v| {
            let p = match axis {
                SweepAxis::Rho => template.with_rho(v)?,
                SweepAxis::Beta => template.with_beta(Beta::finite(v)?)?,
            };
            Ok(SweepPoint {
                rho: p.rho(),
                beta: p.beta(),
                solution: solve_equilibrium(&p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // ρ0 is non-decreasing in both ρ and β
    let increasing = grid.len() < 2 || grid[1] > grid[0];
    for w in points.windows(2) {
        let (lo, hi) = if increasing {
            (&w[0], &w[1])
        } else {
            (&w[1], &w[0])
        };
        let slack = 1e-12 * lo.rho.max(hi.rho);
        if hi.solution.rho0 + slack < lo.solution.rho0 {
            return Err(Error::Consistency {
                quantity: "condensate density".into(),
                detail: format!(
                    "rho0 decreased along the sweep ({} -> {})",
                    lo.solution.rho0, hi.solution.rho0
                ),
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn reference(rho: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.25, 0.0, rho, Beta::Finite(1.0)).unwrap()
    }

    /// g_{3/2}(e^{−w})/(2π)^{3/2} by partial sums with an integral tail at w = 0.
    fn series_oracle(w: f64) -> f64 {
        let g = if w == 0.0 {
            let n = 400_000u64;
            let partial: f64 = (1..n).rev().map(|l| (l as f64).powf(-1.5)).sum();
            partial + 2.0 / (n as f64).sqrt() + 0.5 * (n as f64).powf(-1.5)
        } else {
            (1..2000)
                .map(|l| (-w * l as f64).exp() / (l as f64).powf(1.5))
                .sum()
        };
        g / (2.0 * PI).powf(1.5)
    }

    #[test]
    fn critical_density_reference() {
        let oracle = series_oracle(0.0) + series_oracle(0.5);
        let rc = critical_density(&reference(0.5)).unwrap();
        assert_relative_eq!(rc, oracle, max_relative = 1e-12);
        assert!((rc - 0.21733).abs() < 1e-4);
        assert_eq!(
            critical_density(&reference(0.5).with_beta(Beta::Infinite).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn critical_density_large_gap() {
        let p = reference(0.5).with_gamma(50.0).unwrap();
        let rc = critical_density(&p).unwrap();
        let r0 = rho_alpha(&p, 0.0).unwrap().value;
        assert!(rc >= r0 && rc - r0 < 1e-8);
    }

    #[test]
    fn condensed_reference_point() {
        let sol = solve_equilibrium(&reference(0.5)).unwrap();
        assert!(sol.condensed);
        assert_eq!(sol.mu, 0.25);
        assert_eq!(sol.delta, 0.25);
        let oracle = 0.5 - series_oracle(0.0) - series_oracle(0.5);
        assert_relative_eq!(sol.rho0, oracle, max_relative = 1e-11);
        assert!((sol.rho0 - 0.28267).abs() < 1e-4);
        assert_relative_eq!(sol.total_density(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn normal_reference_point() {
        let sol = solve_equilibrium(&reference(0.1)).unwrap();
        assert!(!sol.condensed);
        assert_eq!(sol.rho0, 0.0);
        assert!(sol.delta > 0.25);
        let lo = series_oracle(sol.delta - 0.25);
        let hi = series_oracle(sol.delta + 0.25);
        assert!(
            (lo + hi - 0.1).abs() < 1e-10 * 0.1,
            "residual {}",
            lo + hi - 0.1
        );
        assert_relative_eq!(sol.mu, 1.0 * 0.1 - sol.delta);
    }

    #[test]
    fn ground_state_condenses_everything() {
        let p = reference(0.37).with_beta(Beta::Infinite).unwrap();
        let sol = solve_equilibrium(&p).unwrap();
        assert!(sol.condensed);
        assert_eq!(sol.rho0, 0.37);
    }

    #[test]
    fn exactly_critical_is_condensed_with_empty_condensate() {
        let rc = critical_density(&reference(0.5)).unwrap();
        let sol = solve_equilibrium(&reference(rc)).unwrap();
        assert!(sol.condensed);
        assert_eq!(sol.rho0, 0.0);
    }

    #[test]
    fn lambda_only_shifts_mu() {
        for rho in [0.1, 0.5] {
            let a = solve_equilibrium(&reference(rho)).unwrap();
            let b = solve_equilibrium(&reference(rho).with_lambda(2.0).unwrap()).unwrap();
            assert!((a.rho0 - b.rho0).abs() < 1e-12);
            assert!((a.delta - b.delta).abs() < 1e-12);
            assert!((b.mu - a.mu - rho).abs() < 1e-12);
        }
    }

    #[test]
    fn order_parameter_examples() {
        let sol = solve_equilibrium(&reference(0.5)).unwrap();
        let op = order_parameters(&sol, &reference(0.5));
        let amp = (sol.rho0 / 2.0).sqrt();
        assert!((op.a1_expectation.re - 0.37594).abs() < 1e-4);
        assert!((op.a1_expectation - op.a2_expectation).norm() < 1e-15);
        assert_relative_eq!(op.a1_expectation.norm(), amp);
        assert_relative_eq!(op.b_minus_expectation.re, sol.rho0.sqrt());

        let p = reference(0.5).with_phi(1.3).unwrap();
        let op = order_parameters(&sol, &p);
        assert_relative_eq!(
            op.a1_expectation.arg() - op.a2_expectation.arg(),
            1.3,
            epsilon = 1e-14
        );
        assert_relative_eq!(op.a2_expectation.norm(), amp, max_relative = 1e-15);

        let normal = solve_equilibrium(&reference(0.1)).unwrap();
        let op = order_parameters(&normal, &p);
        assert_eq!(
            op.a1_expectation.norm() + op.a2_expectation.norm() + op.b_minus_expectation.norm(),
            0.0
        );
    }

    #[test]
    fn sweep_flips_once_and_orders_output() {
        let grid: Vec<f64> = (1..=30).map(|i| 0.02 * i as f64).collect();
        let pts = phase_diagram_sweep(&reference(0.5), SweepAxis::Rho, &grid).unwrap();
        assert_eq!(pts.len(), grid.len());
        for (p, g) in pts.iter().zip(&grid) {
            assert_eq!(p.rho, *g);
        }
        let flips = pts
            .windows(2)
            .filter(|w| w[0].solution.condensed != w[1].solution.condensed)
            .count();
        assert_eq!(flips, 1);
    }

    #[test]
    fn sweep_near_threshold() {
        let rc = critical_density(&reference(0.5)).unwrap();
        let grid = [rc * (1.0 - 1e-6), rc * (1.0 + 1e-6)];
        let pts = phase_diagram_sweep(&reference(0.5), SweepAxis::Rho, &grid).unwrap();
        assert!(!pts[0].solution.condensed);
        assert!(pts[0].solution.delta - 0.25 < 1e-3);
        assert!(pts[1].solution.condensed);
        assert!(pts[1].solution.rho0 < 1e-5);
    }

    #[test]
    fn beta_sweep_condensate_grows() {
        let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
        let pts = phase_diagram_sweep(&reference(0.3), SweepAxis::Beta, &grid).unwrap();
        assert!(pts
            .windows(2)
            .all(|w| w[1].solution.rho0 >= w[0].solution.rho0));
    }

    #[test]
    fn sweep_grid_validation() {
        assert!(phase_diagram_sweep(&reference(0.5), SweepAxis::Rho, &[]).is_err());
        assert!(phase_diagram_sweep(&reference(0.5), SweepAxis::Rho, &[0.1, 0.1]).is_err());
        assert!(phase_diagram_sweep(&reference(0.5), SweepAxis::Rho, &[0.1, 0.3, 0.2]).is_err());
    }

    #[test]
    fn transition_continuity() {
        let rc = critical_density(&reference(0.5)).unwrap();
        let gaps: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|eps| {
                solve_equilibrium(&reference(rc * (1.0 - eps)))
                    .unwrap()
                    .delta
                    - 0.25
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps.iter().all(|g| *g > 0.0));
    }
}
