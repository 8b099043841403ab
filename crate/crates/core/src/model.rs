//! Model parameters, the single-particle dispersion and the two-branch
//! quasiparticle spectrum of the effective (mean-field) Hamiltonian.
//!
//! Units are ħ = k_B = 1 and the dimension is fixed to three.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse temperature. `Infinite` is the ground state and gets its own code
/// paths everywhere (no thermal occupation, coth factors equal to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn finite(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Beta::Finite(beta))
        } else if beta == f64::INFINITY {
            Ok(Beta::Infinite)
        } else {
            Err(Error::invalid(
                "beta",
                format!("must be positive, got {beta}"),
            ))
        }
    }

    /// β = 1/T; T = 0 maps to the ground state.
    pub fn from_temperature(temp: f64) -> Result<Self> {
        if temp == 0.0 {
            Ok(Beta::Infinite)
        } else if temp.is_finite() && temp > 0.0 {
            Ok(Beta::Finite(1.0 / temp))
        } else {
            Err(Error::invalid(
                "temp",
                format!("must be non-negative and finite, got {temp}"),
            ))
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn is_ground_state(self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Beta::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::invalid("beta", format!("cannot parse `{s}`")))?;
                Beta::finite(v)
            }
        }
    }
}

/// Physical parameters of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    mass: f64,
    lambda: f64,
    gamma: f64,
    phi: f64,
    rho: f64,
    beta: Beta,
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl ModelParams {
    /// The phase difference is reduced into `[0, 2π)`. A zero coupling is
    /// rejected: the relative pair needs the gap 2γ > 0.
    pub fn new(mass: f64, lambda: f64, gamma: f64, phi: f64, rho: f64, beta: Beta) -> Result<Self> {
        if gamma == 0.0 {
            return Err(Error::invalid(
                "gamma",
                "the Josephson coupling must be > 0 (the '+' branch gap 2*gamma must not close)",
            ));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("phi", format!("must be finite, got {phi}")));
        }
        if let Beta::Finite(b) = beta {
            positive("beta", b)?;
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(ModelParams {
            mass: positive("mass", mass)?,
            lambda: positive("lambda", lambda)?,
            gamma: positive("gamma", gamma)?,
            phi,
            rho: positive("rho", rho)?,
            beta,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.mass, self.lambda, self.gamma, self.phi, rho, self.beta)
    }
    pub fn with_beta(&self, beta: Beta) -> Result<Self> {
        Self::new(self.mass, self.lambda, self.gamma, self.phi, self.rho, beta)
    }
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.mass, self.lambda, gamma, self.phi, self.rho, self.beta)
    }
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.mass, lambda, self.gamma, self.phi, self.rho, self.beta)
    }
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.mass, self.lambda, self.gamma, phi, self.rho, self.beta)
    }

    /// Thermal wavelength (2πβ/m)^{1/2}; `None` in the ground state.
    pub fn thermal_wavelength(&self) -> Option<f64> {
        self.beta.value().map(|b| (2.0 * PI * b / self.mass).sqrt())
    }
}

/// A wave vector in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Momentum(pub [f64; 3]);

impl Momentum {
    pub const ZERO: Momentum = Momentum([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Momentum([x, y, z])
    }

    /// Momentum of magnitude `k` along the first axis.
    pub fn along_x(k: f64) -> Self {
        Momentum([k, 0.0, 0.0])
    }

    pub fn norm_sqr(&self) -> f64 {
        let [x, y, z] = self.0;
        x * x + y * y + z * z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl std::ops::Add for Momentum {
    type Output = Momentum;
    fn add(self, rhs: Momentum) -> Momentum {
        Momentum([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl std::ops::Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// ε_k = |k|²/2m.
pub fn dispersion(params: &ModelParams, k: &Momentum) -> f64 {
    k.norm_sqr() / (2.0 * params.mass)
}

/// Branch energies (E⁻, E⁺) for a chemical potential `mu`.
pub fn branch_energies(params: &ModelParams, mu: f64, k: &Momentum) -> (f64, f64) {
    let delta = params.lambda * params.rho - mu;
    branch_energies_from_gap(params, delta, k)
}

/// Branch energies written through the gap variable δ = λρ − μ:
/// E∓ = ε_k + (δ ∓ γ). With δ = γ the lower branch is exactly ε_k.
pub fn branch_energies_from_gap(params: &ModelParams, delta: f64, k: &Momentum) -> (f64, f64) {
    let eps = dispersion(params, k);
    (eps + (delta - params.gamma), eps + (delta + params.gamma))
}

/// Bose occupation 1/(e^x − 1) of a positive reduced energy x = βE.
#[inline]
pub(crate) fn bose(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// Thermal occupation 1/(e^{βE} − 1) of a quasiparticle mode.
///
/// A non-positive energy at finite β is the gapless condensate mode, which is
/// not a thermal mode and is reported as a domain error.
pub fn occupation(energy: f64, beta: Beta) -> Result<f64> {
    if energy.is_nan() {
        return Err(Error::domain("occupation of a NaN energy"));
    }
    match beta {
        Beta::Finite(b) => {
            if energy <= 0.0 {
                Err(Error::domain(format!(
                    "occupation requires E > 0 at finite beta, got E = {energy} \
                     (the k = 0 gapless mode is the condensate)"
                )))
            } else {
                Ok(bose(b * energy))
            }
        }
        Beta::Infinite => {
            if energy < 0.0 {
                Err(Error::domain(format!(
                    "negative energy {energy} in the ground state"
                )))
            } else {
                Ok(0.0)
            }
        }
    }
}

/// One point of the two-branch spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub k: Momentum,
    pub f_k: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub n_minus: f64,
    pub n_plus: f64,
}

impl BranchPoint {
    /// Evaluates the spectrum and occupations at gap variable `delta`.
    pub fn evaluate(params: &ModelParams, delta: f64, k: Momentum) -> Result<Self> {
        let (e_minus, e_plus) = branch_energies_from_gap(params, delta, &k);
        Ok(BranchPoint {
            k,
            f_k: dispersion(params, &k) + delta,
            e_minus,
            e_plus,
            n_minus: occupation(e_minus, params.beta)?,
            n_plus: occupation(e_plus, params.beta)?,
        })
    }
}

/// Unitary map from the bare creation operators (a*₁, a*₂) to the branch
/// operators: `rows[0]` holds the coefficients of b*₊, `rows[1]` those of b*₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiparticleMap {
    pub rows: [[Complex64; 2]; 2],
}

impl QuasiparticleMap {
    pub fn plus(&self) -> [Complex64; 2] {
        self.rows[0]
    }

    pub fn minus(&self) -> [Complex64; 2] {
        self.rows[1]
    }

    /// Largest entry of |U U† − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2)
                    .map(|c| self.rows[i][c] * self.rows[j][c].conj())
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// b*_{±,k} = (a*_{1,k} e^{−iφ/2} ∓ a*_{2,k} e^{iφ/2}) / √2.
pub fn quasiparticle_map(params: &ModelParams) -> QuasiparticleMap {
    let half = 0.5 * params.phi;
    let first = Complex64::from_polar(FRAC_1_SQRT_2, -half);
    let second = Complex64::from_polar(FRAC_1_SQRT_2, half);
    QuasiparticleMap {
        rows: [[first, -second], [first, second]],
    }
}
