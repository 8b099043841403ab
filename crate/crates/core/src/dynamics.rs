//! Time evolution of the relative pair (F(n_rel), F(j_rel)).
//!
//! The generator acts as d/dt F(n) = (2γ)² F(j), d/dt F(j) = −F(n), so the
//! pair rotates at the single frequency 2γ with unit determinant.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::fluctuations::{
    relative_commutator_scalar, relative_current_variance, relative_number_variance,
};
use crate::model::ModelParams;

/// M(t) with α̃_t (F(n), F(j))ᵀ = M(t) (F(n), F(j))ᵀ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionMatrix {
    pub t: f64,
    pub entries: [[f64; 2]; 2],
}

impl EvolutionMatrix {
    pub fn identity() -> Self {
        EvolutionMatrix {
            t: 0.0,
            entries: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn compose(&self, other: &EvolutionMatrix) -> EvolutionMatrix {
        let a = &self.entries;
        let b = &other.entries;
        let mut entries = [[0.0; 2]; 2];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        EvolutionMatrix {
            t: self.t + other.t,
            entries,
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &EvolutionMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        d
    }
}

pub fn evolution_matrix(params: &ModelParams, t: f64) -> EvolutionMatrix {
    let g = params.gamma();
    let period = PI / g;
    let theta = 2.0 * g * t.rem_euclid(period);
    let (s, c) = theta.sin_cos();
    EvolutionMatrix {
        t,
        entries: [[c, 2.0 * g * s], [-s / (2.0 * g), c]],
    }
}

/// Commutator scalar of the evolved pair, c_rel det M(t).
pub fn commutator_conservation(params: &ModelParams, sol: &EquilibriumSolution, t: f64) -> f64 {
    relative_commutator_scalar(params, sol) * evolution_matrix(params, t).determinant()
}

/// A real signal sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SignalTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `steps` equally spaced times from 0 to `t_max` inclusive.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid(
            "t_max",
            format!("must be finite and > 0, got {t_max}"),
        ));
    }
    if steps < 2 {
        return Err(Error::invalid(
            "t_steps",
            format!("need at least 2 points, got {steps}"),
        ));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|i| t_max * (i as f64 / last)).collect())
}

fn require_condensed(sol: &EquilibriumSolution) -> Result<()> {
    if sol.condensed && sol.rho0 > 0.0 {
        Ok(())
    } else {
        Err(Error::Degenerate(
            "relative-pair dynamics needs the condensed regime (rho0 > 0)".into(),
        ))
    }
}

/// Symmetrized covariance of (F(n), F(j)); the off-diagonal vanishes.
fn covariance(params: &ModelParams, sol: &EquilibriumSolution) -> [[f64; 2]; 2] {
    [
        [relative_number_variance(params, sol), 0.0],
        [0.0, relative_current_variance(params, sol)],
    ]
}

/// (1/2)⟨α̃_t F(n)·F(n) + F(n)·α̃_t F(n)⟩ = Var F(n_rel) cos 2γt.
pub fn autocorrelation_n(params: &ModelParams, sol: &EquilibriumSolution, t: f64) -> Result<f64> {
    require_condensed(sol)?;
    let m = evolution_matrix(params, t).entries;
    let cov = covariance(params, sol);
    Ok(m[0][0] * cov[0][0] + m[0][1] * cov[1][0])
}

/// Autocorrelation of F(j_rel^φ) = sin φ F(j_rel): sin²φ Var F(j_rel) cos 2γt.
pub fn phi_current_trace(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    times: &[f64],
) -> Result<SignalTrace> {
    require_condensed(sol)?;
    let cov = covariance(params, sol);
    let sin_phi = params.phi().sin();
    let weight = sin_phi * sin_phi;
    let values = times
        .iter()
        .map(|&t| {
            let m = evolution_matrix(params, t).entries;
            weight * (m[1][0] * cov[0][1] + m[1][1] * cov[1][1])
        })
        .collect();
    Ok(SignalTrace {
        times: times.to_vec(),
        values,
    })
}

/// Σ w_g cos(g t) for (gap, weight) pairs g, w_g.
pub fn superposition_signal(weights: &[(f64, f64)], times: &[f64]) -> Result<SignalTrace> {
    if weights.is_empty() {
        return Err(Error::invalid(
            "weights",
            "need at least one (gap, weight) pair",
        ));
    }
    for &(g, w) in weights {
        if !g.is_finite() || !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(
                "weights",
                format!(
                    "gap {g} with weight {w}: need finite gaps and finite non-negative weights"
                ),
            ));
        }
    }
    let values = times
        .iter()
        .map(|&t| {
            crate::numerics::compensated_sum(
                weights
                    .iter()
                    .map(|&(g, w)| w * (g * t).rem_euclid(TAU).cos()),
            )
        })
        .collect();
    Ok(SignalTrace {
        times: times.to_vec(),
        values,
    })
}
