//! Finite-volume oracle: thermodynamic-limit integrals and fluctuation
//! moments as sums over the periodic momentum lattice (2π/L)ℤ³.
//!
//! The condensate mode k = 0 enters as a c-number of size √(ρ0 V). Every
//! reduction runs in a fixed order with compensated summation, so results do
//! not depend on the number of threads.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::fluctuations::{
    relative_commutator_scalar, relative_number_variance, total_number_variance,
    total_phase_variance, virial_kernel_sides,
};
use crate::model::{bose, dispersion, Beta, ModelParams, Momentum};
use crate::numerics::{compensated_sum, CompensatedSum};

/// Modes with βε_k above this are dropped unless configured otherwise.
pub const DEFAULT_ENERGY_CUTOFF: f64 = 40.0;

/// Tolerance of the per-mode virial identity checked during summation.
pub const PER_MODE_IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSpec {
    length: f64,
    cutoff: f64,
    include_condensate: bool,
}

impl LatticeSpec {
    pub fn new(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(
                "L",
                format!("box length must be finite and > 0, got {length}"),
            ));
        }
        Ok(LatticeSpec {
            length,
            cutoff: DEFAULT_ENERGY_CUTOFF,
            include_condensate: true,
        })
    }

    pub fn with_cutoff(self, cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::invalid(
                "cutoff",
                format!("must be finite and > 0, got {cutoff}"),
            ));
        }
        Ok(LatticeSpec { cutoff, ..self })
    }

    pub fn with_condensate(self, include_condensate: bool) -> Self {
        LatticeSpec {
            include_condensate,
            ..self
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn include_condensate(&self) -> bool {
        self.include_condensate
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Lattice spacing 2π/L.
    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / self.length
    }
}

/// Energy of the integer vector with |n|² = s.
fn shell_energy(params: &ModelParams, spec: &LatticeSpec, s: u64) -> f64 {
    let dk = spec.spacing();
    dk * dk * s as f64 / (2.0 * params.mass())
}

/// Largest |n|² kept by the cutoff βε ≤ c.
fn max_shell(params: &ModelParams, spec: &LatticeSpec, beta: f64) -> Result<u64> {
    let dk = spec.spacing();
    let mut s = (spec.cutoff * 2.0 * params.mass() / (beta * dk * dk))
        .floor()
        .max(0.0) as u64;
    while s > 0 && beta * shell_energy(params, spec, s) > spec.cutoff {
        s -= 1;
    }
    while beta * shell_energy(params, spec, s + 1) <= spec.cutoff {
        s += 1;
    }
    if s == 0 {
        return Err(Error::EmptyLattice {
            length: spec.length,
            cutoff: spec.cutoff,
        });
    }
    Ok(s)
}

fn finite_beta(params: &ModelParams, spec: &LatticeSpec) -> Result<f64> {
    match params.beta() {
        Beta::Finite(b) => Ok(b),
        Beta::Infinite => Err(Error::EmptyLattice {
            length: spec.length,
            cutoff: spec.cutoff,
        }),
    }
}

/// Integer root of s, rounded down.
fn isqrt(s: u64) -> i64 {
    let mut r = (s as f64).sqrt() as i64;
    while (r * r) as u64 > s {
        r -= 1;
    }
    while ((r + 1) * (r + 1)) as u64 <= s {
        r += 1;
    }
    r
}

/// All nonzero lattice momenta with βε_k ≤ cutoff, ordered by |k|² and then
/// lexicographically by the integer components.
pub fn lattice_modes(spec: &LatticeSpec, params: &ModelParams) -> Result<Vec<Momentum>> {
    let beta = finite_beta(params, spec)?;
    let s_max = max_shell(params, spec, beta)?;
    let r = isqrt(s_max);
    let mut ints = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let s = (x * x + y * y + z * z) as u64;
                if s != 0 && s <= s_max {
                    ints.push((s, x, y, z));
                }
            }
        }
    }
    ints.sort_unstable();
    let dk = spec.spacing();
    Ok(ints
        .into_iter()
        .map(|(_, x, y, z)| Momentum::new(dk * x as f64, dk * y as f64, dk * z as f64))
        .collect())
}

/// Number of integer vectors on each shell |n|² = s for s ≤ s_max.
fn shell_multiplicities(s_max: u64) -> Vec<u64> {
    let len = s_max as usize + 1;
    let r = isqrt(s_max);
    let mut two = vec![0u64; len];
    for a in -r..=r {
        for b in -r..=r {
            let s = (a * a + b * b) as usize;
            if s < len {
                two[s] += 1;
            }
        }
    }
    let mut three = vec![0u64; len];
    for c in -r..=r {
        let c2 = (c * c) as usize;
        for (s, &count) in two.iter().enumerate().take(len - c2) {
            three[s + c2] += count;
        }
    }
    three
}

/// (1/V) Σ_{k≠0} f(βE_k⁻, βE_k⁺) over the kept modes, one shell at a time.
fn shell_sum<F>(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
    f: F,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let beta = finite_beta(params, spec)?;
    let s_max = max_shell(params, spec, beta)?;
    let counts = shell_multiplicities(s_max);
    let g = params.gamma();
    let shells: Vec<f64> = (1..=s_max)
        .into_par_iter()
        .map(|s| {
            let count = counts[s as usize];
            if count == 0 {
                return Ok(0.0);
            }
            let eps = shell_energy(params, spec, s);
            let value = f(beta * (eps + sol.delta - g), beta * (eps + sol.delta + g))?;
            Ok(count as f64 * value)
        })
        .collect::<Result<_>>()?;
    Ok(compensated_sum(shells) / spec.volume())
}

/// Thermal part (1/V) Σ_{k≠0} (n₋(k) + n₊(k)).
fn lattice_thermal_density(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
) -> Result<f64> {
    if params.beta().is_ground_state() {
        return Ok(0.0);
    }
    shell_sum(params, sol, spec, |a, b| Ok(bose(a) + bose(b)))
}

/// ρ0·[include condensate] + (1/V) Σ_{k≠0} (n₋(k) + n₊(k)).
pub fn lattice_density(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
) -> Result<f64> {
    let thermal = lattice_thermal_density(params, sol, spec)?;
    Ok(if spec.include_condensate {
        sol.rho0 + thermal
    } else {
        thermal
    })
}

fn require_condensed(sol: &EquilibriumSolution) -> Result<()> {
    if sol.condensed && sol.rho0 > 0.0 {
        Ok(())
    } else {
        Err(Error::Degenerate(
            "lattice relative-pair sums need the condensed regime (rho0 > 0)".into(),
        ))
    }
}

/// (1/γ)[ρ0 + (1/V) Σ_{k≠0} (n₋(k) − n₊(k))].
pub fn lattice_c_rel(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
) -> Result<f64> {
    require_condensed(sol)?;
    let thermal = if params.beta().is_ground_state() {
        0.0
    } else {
        shell_sum(params, sol, spec, |a, b| Ok(bose(a) - bose(b)))?
    };
    Ok((sol.rho0 + thermal) / params.gamma())
}

/// ρ0(2n₊(0) + 1) + (1/V) Σ_{k≠0} [n₊(1 + n₋) + n₋(1 + n₊)], checking each
/// summand against (n₋ − n₊) coth(βγ).
pub fn lattice_rel_number_variance(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
) -> Result<f64> {
    require_condensed(sol)?;
    let beta = match params.beta() {
        Beta::Infinite => return Ok(sol.rho0),
        Beta::Finite(b) => b,
    };
    let n_gap = bose(2.0 * beta * params.gamma());
    let condensate = sol.rho0 * (2.0 * n_gap + 1.0);
    let thermal = shell_sum(params, sol, spec, |a, b| {
        let (lhs, rhs) = virial_kernel_sides(a, b);
        if (lhs - rhs).abs() > PER_MODE_IDENTITY_TOLERANCE * lhs.abs().max(1.0) {
            return Err(Error::Consistency {
                quantity: "per-mode virial identity".into(),
                detail: format!("a = {a}, b = {b}: {lhs:e} vs {rhs:e}"),
            });
        }
        Ok(lhs)
    })?;
    Ok(condensate + thermal)
}

/// Integer components of a lattice momentum; domain error off the lattice or at 0.
fn lattice_index(spec: &LatticeSpec, k: &Momentum) -> Result<[i64; 3]> {
    let dk = spec.spacing();
    let mut n = [0i64; 3];
    for (slot, &c) in n.iter_mut().zip(k.0.iter()) {
        let x = c / dk;
        let r = x.round();
        if !x.is_finite() || (x - r).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::domain(format!(
                "momentum {:?} is not on the lattice (2π/{})Z³",
                k.0, spec.length
            )));
        }
        *slot = r as i64;
    }
    if n == [0, 0, 0] {
        return Err(Error::domain(
            "the lattice fluctuation needs a nonzero mode k",
        ));
    }
    Ok(n)
}

/// Wick value (1/2)(2n₋(k) + 1) for a lattice mode k ≠ 0.
pub fn lattice_total_phase_variance(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
    k: &Momentum,
) -> Result<f64> {
    lattice_index(spec, k)?;
    match params.beta() {
        Beta::Infinite => Ok(0.5),
        Beta::Finite(b) => {
            let n = bose(b * (dispersion(params, k) + sol.delta - params.gamma()));
            Ok(0.5 * (2.0 * n + 1.0))
        }
    }
}

/// Pair sum Σ_{p≠0, p≠−k} over both branches of K(βE_p, βE_{p+k}), where p
/// runs over every vector with p or p + k inside the cutoff. With `relabel`
/// each summand is evaluated at −p − k instead of p.
fn pair_sum(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
    beta: f64,
    kn: [i64; 3],
    relabel: bool,
) -> Result<f64> {
    let s_max = max_shell(params, spec, beta)?;
    let r = isqrt(s_max);
    let reach = kn.iter().map(|c| c.abs()).max().unwrap_or(0);
    let box_r = r + reach;
    let table_len = (3 * (box_r + reach) * (box_r + reach)) as usize + 1;
    let g = params.gamma();
    let occupations = |shift: f64| -> Vec<f64> {
        (0..table_len)
            .map(|s| {
                let x = beta * (shell_energy(params, spec, s as u64) + shift);
                if x > 0.0 {
                    bose(x)
                } else {
                    f64::NAN
                }
            })
            .collect()
    };
    let minus = occupations(sol.delta - g);
    let plus = occupations(sol.delta + g);
    let norm = |v: [i64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as usize;

    let slices: Vec<f64> = (-box_r..=box_r)
        .into_par_iter()
        .map(|x| {
            let mut acc = CompensatedSum::new();
            for y in -box_r..=box_r {
                for z in -box_r..=box_r {
                    let p = [x, y, z];
                    let q = [x + kn[0], y + kn[1], z + kn[2]];
                    let sp = norm(p);
                    let sq = norm(q);
                    if sp == 0 || sq == 0 || (sp as u64 > s_max && sq as u64 > s_max) {
                        continue;
                    }
                    let (sa, sb) = if relabel {
                        // −p − k and (−p − k) + k = −p
                        (sq, sp)
                    } else {
                        (sp, sq)
                    };
                    acc.add(pair_kernel_from_occupations(minus[sa], minus[sb]));
                    acc.add(pair_kernel_from_occupations(plus[sa], plus[sb]));
                }
            }
            acc.value()
        })
        .collect();
    let total = compensated_sum(slices);
    if !total.is_finite() {
        return Err(Error::Consistency {
            quantity: "lattice pair sum".into(),
            detail: "non-finite occupation inside the summation range".into(),
        });
    }
    Ok(total)
}

#[inline]
fn pair_kernel_from_occupations(na: f64, nb: f64) -> f64 {
    na + nb + 2.0 * na * nb
}

/// Condensate term (ρ0/2) coth(βε_k/2) plus (1/2V) times the pair sum.
pub fn lattice_total_number_variance(
    params: &ModelParams,
    sol: &EquilibriumSolution,
    spec: &LatticeSpec,
    k: &Momentum,
) -> Result<f64> {
    let kn = lattice_index(spec, k)?;
    let beta = match params.beta() {
        Beta::Infinite => return Ok(0.5 * sol.rho0),
        Beta::Finite(b) => b,
    };
    let condensate = 0.5 * sol.rho0 * (2.0 * bose(beta * dispersion(params, k)) + 1.0);
    let pairs = pair_sum(params, sol, spec, beta, kn, false)?;
    Ok(condensate + pairs / (2.0 * spec.volume()))
}

/// Lattice quantity tracked by [`convergence_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LatticeQuantity {
    Density,
    RelativeCommutator,
    RelativeNumberVariance,
    TotalPhaseVariance(Momentum),
    TotalNumberVariance(Momentum),
}

impl LatticeQuantity {
    pub fn label(&self) -> &'static str {
        match self {
            LatticeQuantity::Density => "density",
            LatticeQuantity::RelativeCommutator => "c-rel",
            LatticeQuantity::RelativeNumberVariance => "var-n-rel",
            LatticeQuantity::TotalPhaseVariance(_) => "var-phi-tot",
            LatticeQuantity::TotalNumberVariance(_) => "var-n-tot",
        }
    }

    /// Parses a label; the momentum is used by the k-resolved quantities.
    pub fn parse(label: &str, k: Momentum) -> Result<Self> {
        Ok(match label {
            "density" => LatticeQuantity::Density,
            "c-rel" => LatticeQuantity::RelativeCommutator,
            "var-n-rel" => LatticeQuantity::RelativeNumberVariance,
            "var-phi-tot" => LatticeQuantity::TotalPhaseVariance(k),
            "var-n-tot" => LatticeQuantity::TotalNumberVariance(k),
            other => {
                return Err(Error::invalid(
                    "quantity",
                    format!("unknown lattice quantity '{other}' (density, c-rel, var-n-rel, var-phi-tot, var-n-tot)"),
                ))
            }
        })
    }

    fn lattice_value(
        &self,
        params: &ModelParams,
        sol: &EquilibriumSolution,
        spec: &LatticeSpec,
    ) -> Result<f64> {
        match self {
            LatticeQuantity::Density => lattice_density(params, sol, spec),
            LatticeQuantity::RelativeCommutator => lattice_c_rel(params, sol, spec),
            LatticeQuantity::RelativeNumberVariance => {
                lattice_rel_number_variance(params, sol, spec)
            }
            LatticeQuantity::TotalPhaseVariance(k) => {
                lattice_total_phase_variance(params, sol, spec, k)
            }
            LatticeQuantity::TotalNumberVariance(k) => {
                lattice_total_number_variance(params, sol, spec, k)
            }
        }
    }

    fn closed_form(&self, params: &ModelParams, sol: &EquilibriumSolution) -> Result<f64> {
        match self {
            LatticeQuantity::Density => Ok(sol.total_density()),
            LatticeQuantity::RelativeCommutator => Ok(relative_commutator_scalar(params, sol)),
            LatticeQuantity::RelativeNumberVariance => Ok(relative_number_variance(params, sol)),
            LatticeQuantity::TotalPhaseVariance(k) => total_phase_variance(params, k),
            LatticeQuantity::TotalNumberVariance(k) => total_number_variance(params, sol, k),
        }
    }
}

impl FromStr for LatticeQuantity {
    type Err = Error;

    /// Labels of k-resolved quantities need a momentum; use
    /// [`LatticeQuantity::parse`] for those.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "var-phi-tot" | "var-n-tot" => Err(Error::invalid(
                "quantity",
                format!("'{s}' needs a momentum k"),
            )),
            other => LatticeQuantity::parse(other, Momentum::ZERO),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub length: f64,
    pub oracle: f64,
    pub closed_form: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub quantity: String,
    pub rows: Vec<ConvergenceRow>,
    pub threshold: f64,
    pub verdict: bool,
}

impl ConvergenceReport {
    pub fn final_relative_error(&self) -> f64 {
        self.rows
            .last()
            .map(|r| r.abs_err / r.closed_form.abs())
            .unwrap_or(f64::NAN)
    }
}

/// Default bound on the final relative error of a convergence run.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-2;

/// Errors at or below this relative size count as exact rather than as a
/// sequence that still has to shrink.
const EXACT_FLOOR: f64 = 1e-14;

/// Runs a lattice quantity over increasing box lengths and compares it with
/// its infinite-volume closed form.
pub fn convergence_report(
    quantity: LatticeQuantity,
    params: &ModelParams,
    sol: &EquilibriumSolution,
    lengths: &[f64],
    cutoff: f64,
) -> Result<ConvergenceReport> {
    if lengths.len() < 3 {
        return Err(Error::invalid(
            "L-seq",
            format!("need at least 3 box lengths, got {}", lengths.len()),
        ));
    }
    if lengths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "L-seq",
            "box lengths must be strictly increasing",
        ));
    }
    let closed_form = quantity.closed_form(params, sol)?;
    let mut rows = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let spec = LatticeSpec::new(length)?.with_cutoff(cutoff)?;
        let oracle = quantity.lattice_value(params, sol, &spec)?;
        rows.push(ConvergenceRow {
            length,
            oracle,
            closed_form,
            abs_err: (oracle - closed_form).abs(),
        });
    }
    let floor = EXACT_FLOOR * closed_form.abs();
    let shrinking = rows
        .windows(2)
        .all(|w| w[1].abs_err < w[0].abs_err || (w[0].abs_err <= floor && w[1].abs_err <= floor));
    let mut report = ConvergenceReport {
        quantity: quantity.label().to_string(),
        rows,
        threshold: CONVERGENCE_THRESHOLD,
        verdict: false,
    };
    report.verdict = shrinking && report.final_relative_error() < CONVERGENCE_THRESHOLD;
    Ok(report)
}
