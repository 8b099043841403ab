//! Thermal density of one quasiparticle branch shifted by a gap α:
//! ρ(α) = ∫ d³k/(2π)³ 1/(e^{β(ε_k+α)} − 1).

use std::f64::consts::PI;

use serde::Serialize;

use super::polylog::bose_function;
use super::quad::{adaptive_quad, QuadratureSpec};
use crate::error::{Error, Result};
use crate::model::{Beta, ModelParams};

/// Largest reduced energy x = βε kept in the quadrature; e^{−745} underflows.
pub const REDUCED_ENERGY_CUTOFF: f64 = 745.0;

/// Relative agreement required between the two evaluation routes.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMethod {
    Series,
    Quadrature,
}

/// A cross-checked density. `value` comes from `method`; `cross_check` is the
/// other route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityValue {
    pub alpha: f64,
    pub value: f64,
    pub method: DensityMethod,
    pub cross_check: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "density gap alpha must be >= 0, got {alpha}"
        )))
    }
}

/// g_{3/2}(e^{−βα}) / λ_T³.
pub fn density_series(params: &ModelParams, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    match params.beta() {
        Beta::Infinite => Ok(0.0),
        Beta::Finite(beta) => {
            let lambda_t = params.thermal_wavelength().expect("finite beta");
            Ok(bose_function(1.5, beta * alpha)? / lambda_t.powi(3))
        }
    }
}

/// Radial quadrature (1/2π²)∫p²dp n(β(p²/2m + α)) in the reduced energy
/// x = βp²/2m, truncated at x = 745.
pub fn density_quadrature(params: &ModelParams, alpha: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    let beta = match params.beta() {
        Beta::Infinite => return Ok(0.0),
        Beta::Finite(b) => b,
    };
    let shift = beta * alpha;
    if shift > REDUCED_ENERGY_CUTOFF {
        return Ok(0.0);
    }
    let z = (-shift).exp();
    let one_minus_z = -(-shift).exp_m1();
    // 1/(e^{x+shift} − 1) = z / (e^x − z), with e^x − z = expm1(x) + (1 − z)
    let integrand = |x: f64| x.sqrt() / (x.exp_m1() + one_minus_z);
    let r = adaptive_quad(integrand, 0.0, REDUCED_ENERGY_CUTOFF, spec)?;
    let prefactor = (2.0 * params.mass() / beta).powf(1.5) / (4.0 * PI * PI);
    Ok(prefactor * z * r.value)
}

/// ρ(α) by both routes; disagreement beyond 1e-8 relative is an error.
pub fn rho_alpha(params: &ModelParams, alpha: f64) -> Result<DensityValue> {
    let series = density_series(params, alpha)?;
    let quad = density_quadrature(params, alpha, &QuadratureSpec::default())?;
    let scale = series.abs().max(quad.abs());
    if scale > 0.0 && (series - quad).abs() > CROSS_CHECK_TOLERANCE * scale {
        return Err(Error::Consistency {
            quantity: format!("rho({alpha})"),
            detail: format!("series {series:e} vs quadrature {quad:e}"),
        });
    }
    Ok(DensityValue {
        alpha,
        value: series,
        method: DensityMethod::Series,
        cross_check: quad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.25, 0.0, 0.5, Beta::Finite(1.0)).unwrap()
    }

    /// ζ(3/2) / (2π)^{3/2} from a long partial sum with its integral tail.
    fn rho_zero_oracle() -> f64 {
        let n = 400_000u64;
        let partial: f64 = (1..n).rev().map(|l| (l as f64).powf(-1.5)).sum();
        (partial + 2.0 / (n as f64).sqrt() + 0.5 * (n as f64).powf(-1.5)) / (2.0 * PI).powf(1.5)
    }

    #[test]
    fn critical_value_at_unit_parameters() {
        let d = rho_alpha(&unit_params(), 0.0).unwrap();
        assert_relative_eq!(d.value, rho_zero_oracle(), max_relative = 1e-12);
        assert!((d.value - 0.165869).abs() < 1e-6);
        assert_eq!(d.method, DensityMethod::Series);
    }

    #[test]
    fn shifted_value() {
        let z = (-0.5f64).exp();
        let oracle: f64 = (1..=400)
            .map(|l| z.powi(l) / (l as f64).powf(1.5))
            .sum::<f64>()
            / (2.0 * PI).powf(1.5);
        let d = rho_alpha(&unit_params(), 0.5).unwrap();
        assert_relative_eq!(d.value, oracle, max_relative = 1e-13);
        assert!((d.value - 0.051460).abs() < 1e-5);
    }

    #[test]
    fn decreasing_in_gap() {
        let p = unit_params();
        let mut last = f64::INFINITY;
        for a in [0.0, 0.01, 0.1, 1.0, 2.0, 5.0] {
            let v = rho_alpha(&p, a).unwrap().value;
            assert!(v < last);
            assert!(rho_alpha(&p, a + 1.0).unwrap().value < v);
            last = v;
        }
    }

    #[test]
    fn ground_state_is_empty() {
        let p = unit_params().with_beta(Beta::Infinite).unwrap();
        assert_eq!(rho_alpha(&p, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn negative_gap_rejected() {
        assert!(rho_alpha(&unit_params(), -0.1).is_err());
    }

    #[test]
    fn tiny_gap_both_routes_agree() {
        let p = unit_params();
        for a in [1e-12, 1e-9, 1e-6] {
            rho_alpha(&p, a).unwrap();
        }
    }

    #[test]
    fn large_gap_stays_relative() {
        let p = unit_params();
        let d = rho_alpha(&p, 100.0).unwrap();
        assert!(d.value > 0.0 && d.value < 1e-40);
    }
}
