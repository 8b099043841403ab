//! Bose functions g_s(z) = Σ_{l≥1} z^l / l^s on z ∈ [0, 1] and the Riemann
//! zeta function they reduce to at z = 1.
//!
//! Near z = 1 the defining series converges far too slowly, so the functions
//! are parametrized by w = −ln z and switch to the expansion about w = 0 for
//! small w.

use statrs::function::gamma::gamma;

use super::sum::CompensatedSum;
use crate::error::{Error, Result};

/// B_{2k} / (2k)! for k = 1..=10.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -5.284190138687493e-10,
    1.3382536530684679e-11,
    -3.3896802963225827e-13,
    8.586062056277845e-15,
    -2.174868698558062e-16,
];

/// Explicit terms used for ζ(s) at z = 1.
const ZETA_EXPLICIT_TERMS: usize = 10_000;

/// Tail Σ_{n≥N} n^{-s} by Euler–Maclaurin: integral, half end term and
/// Bernoulli corrections.
fn zeta_tail(s: f64, n: f64, corrections: usize) -> f64 {
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // (s)(s+1)...(s+2k-2) N^{-s-2k+1}
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (k, coef) in BERNOULLI_OVER_FACTORIAL
        .iter()
        .take(corrections)
        .enumerate()
    {
        if k > 0 {
            let j = (2 * k) as f64;
            rising *= (s + j - 1.0) * (s + j);
            power /= n * n;
        }
        tail += coef * rising * power;
    }
    tail
}

/// ζ(s) for s > 1 from 10 000 explicit terms plus an Euler–Maclaurin tail.
pub fn zeta_explicit(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Divergent(format!("zeta({s}) series requires s > 1")));
    }
    let mut acc = CompensatedSum::new();
    // small terms first
    for n in (1..ZETA_EXPLICIT_TERMS).rev() {
        acc.add((n as f64).powf(-s));
    }
    acc.add(zeta_tail(s, ZETA_EXPLICIT_TERMS as f64, 3));
    Ok(acc.value())
}

/// Riemann ζ(s) for real s ≠ 1.
///
/// s ≥ 1/2 uses Euler–Maclaurin with 32 explicit terms; s < 1/2 uses the
/// reflection formula.
pub fn zeta(s: f64) -> Result<f64> {
    if s == 1.0 || s.is_nan() {
        return Err(Error::Divergent(format!("zeta has a pole at s = {s}")));
    }
    if s == 0.0 {
        return Ok(-0.5);
    }
    if s < 0.5 {
        let t = 1.0 - s;
        // trivial zeros
        if s < 0.0 && s.fract() == 0.0 && (s as i64) % 2 == 0 {
            return Ok(0.0);
        }
        let reflected = zeta(t)?;
        return Ok(2f64.powf(s)
            * std::f64::consts::PI.powf(s - 1.0)
            * (0.5 * std::f64::consts::PI * s).sin()
            * gamma(t)
            * reflected);
    }
    const N: usize = 32;
    let mut acc = CompensatedSum::new();
    for n in (1..N).rev() {
        acc.add((n as f64).powf(-s));
    }
    acc.add(zeta_tail(s, N as f64, BERNOULLI_OVER_FACTORIAL.len()));
    Ok(acc.value())
}

/// Below this w = −ln z the small-w expansion replaces the direct series.
const SMALL_W: f64 = 1.0;

fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && s >= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Bose function order must be >= 1, got {s}"
        )))
    }
}

/// g_s(z) for z ∈ [0, 1].
pub fn polylog_bose(s: f64, z: f64) -> Result<f64> {
    check_order(s)?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain(format!(
            "Bose function argument must lie in [0, 1], got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    bose_function(s, -z.ln())
}

/// g_s(e^{−w}) for w ≥ 0. Passing w directly keeps full precision when
/// e^{−w} would round to 1.
pub fn bose_function(s: f64, w: f64) -> Result<f64> {
    check_order(s)?;
    if !(w >= 0.0) {
        return Err(Error::domain(format!(
            "Bose function needs w = -ln z >= 0, got {w}"
        )));
    }
    if w == f64::INFINITY {
        return Ok(0.0);
    }
    if w == 0.0 {
        if s <= 1.0 {
            return Err(Error::Divergent(format!("g_{s}(1) diverges for s <= 1")));
        }
        return zeta_explicit(s);
    }
    if s == 1.0 {
        return Ok(-(-(-w).exp_m1()).ln());
    }
    if w >= SMALL_W {
        Ok(direct_series(s, w))
    } else if s.fract() == 0.0 {
        integer_order_expansion(s as u32, w)
    } else {
        fractional_order_expansion(s, w)
    }
}

/// Σ z^l / l^s, stopped once the geometric tail bound falls below 1e-16 of
/// the partial sum.
fn direct_series(s: f64, w: f64) -> f64 {
    const MAX_TERMS: usize = 100_000;
    let z = (-w).exp();
    let tail_factor = z / -(-w).exp_m1();
    let mut acc = CompensatedSum::new();
    let mut zl = 1.0;
    for l in 1..=MAX_TERMS {
        zl *= z;
        let term = zl * (l as f64).powf(-s);
        acc.add(term);
        if term * tail_factor < 1e-16 * acc.value() || term == 0.0 {
            break;
        }
    }
    acc.value()
}

/// g_s(e^{−w}) = Γ(1−s) w^{s−1} + Σ_n ζ(s−n) (−w)^n / n!, non-integer s, w < 2π.
fn fractional_order_expansion(s: f64, w: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    acc.add(gamma(1.0 - s) * w.powf(s - 1.0));
    let mut coef = 1.0; // (−w)^n / n!
    let mut small_run = 0;
    for n in 0..80 {
        if n > 0 {
            coef *= -w / n as f64;
        }
        let term = zeta(s - n as f64)? * coef;
        acc.add(term);
        if term.abs() < 1e-17 * acc.value().abs() {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    Ok(acc.value())
}

/// Integer order s = m ≥ 2:
/// g_m(e^{−w}) = (−w)^{m−1}/(m−1)! (H_{m−1} − ln w) + Σ_{n≠m−1} ζ(m−n) (−w)^n / n!.
fn integer_order_expansion(m: u32, w: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    let mut coef = 1.0;
    let mut small_run = 0;
    for n in 0..80u32 {
        if n > 0 {
            coef *= -w / n as f64;
        }
        let term = if n + 1 == m {
            let harmonic: f64 = (1..m).map(|j| 1.0 / j as f64).sum();
            coef * (harmonic - w.ln())
        } else {
            zeta(m as f64 - n as f64)? * coef
        };
        acc.add(term);
        if n + 1 > m && term.abs() < 1e-17 * acc.value().abs() {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Plain partial sums, independent of every branch above.
    fn brute_series(s: f64, z: f64, terms: usize) -> f64 {
        (1..=terms)
            .map(|l| z.powi(l as i32) / (l as f64).powf(s))
            .sum()
    }

    #[test]
    fn zeta_known_values() {
        assert_relative_eq!(
            zeta(2.0).unwrap(),
            std::f64::consts::PI.powi(2) / 6.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            zeta(4.0).unwrap(),
            std::f64::consts::PI.powi(4) / 90.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(zeta(1.5).unwrap(), 2.612375348685488, max_relative = 1e-15);
        assert_relative_eq!(
            zeta(0.5).unwrap(),
            -1.4603545088095868,
            max_relative = 1e-14
        );
        assert_relative_eq!(zeta(-1.0).unwrap(), -1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(
            zeta(-0.5).unwrap(),
            -0.20788622497735457,
            max_relative = 1e-13
        );
        assert_relative_eq!(zeta(-3.0).unwrap(), 1.0 / 120.0, max_relative = 1e-13);
        assert_eq!(zeta(-4.0).unwrap(), 0.0);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn explicit_and_fast_zeta_agree() {
        for s in [1.5, 2.0, 2.5, 3.5, 7.0] {
            assert_relative_eq!(
                zeta_explicit(s).unwrap(),
                zeta(s).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn polylog_examples() {
        assert_eq!(polylog_bose(1.5, 0.0).unwrap(), 0.0);
        assert_relative_eq!(polylog_bose(1.5, 1.0).unwrap(), 2.612375, epsilon = 1e-6);
        let z = (-0.5f64).exp();
        let oracle = brute_series(1.5, z, 50);
        assert!((polylog_bose(1.5, z).unwrap() - 0.81047).abs() < 1e-4);
        // the 50-term truncation leaves a tail of order z^50/50^1.5
        assert!((polylog_bose(1.5, z).unwrap() - oracle).abs() < 1e-12);
        assert_relative_eq!(
            polylog_bose(1.5, z).unwrap(),
            brute_series(1.5, z, 200),
            max_relative = 1e-14
        );
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(polylog_bose(1.5, 1.1), Err(Error::Domain(_))));
        assert!(matches!(polylog_bose(1.5, -0.1), Err(Error::Domain(_))));
        assert!(matches!(polylog_bose(1.0, 1.0), Err(Error::Divergent(_))));
        assert!(matches!(polylog_bose(0.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn expansion_matches_series_on_both_sides_of_switch() {
        for s in [1.5, 2.0, 2.5, 3.0] {
            for w in [0.3f64, 0.6, 0.99, 1.01, 1.5] {
                let z = (-w).exp();
                let oracle = brute_series(s, z, 4000);
                let value = bose_function(s, w).unwrap();
                assert_relative_eq!(value, oracle, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn continuity_at_unit_argument() {
        let g1 = bose_function(1.5, 0.0).unwrap();
        let w = 1e-14;
        let g = bose_function(1.5, w).unwrap();
        // g(1) - g(e^{-w}) ~ 2 sqrt(pi w)
        let expected = 2.0 * (std::f64::consts::PI * w).sqrt();
        assert_relative_eq!(g1 - g, expected, max_relative = 1e-3);
    }

    #[test]
    fn order_one_is_log() {
        let z: f64 = 0.3;
        assert_relative_eq!(
            polylog_bose(1.0, z).unwrap(),
            -(1.0 - z).ln(),
            max_relative = 1e-15
        );
    }

    proptest! {
        #[test]
        fn monotone_in_argument(s in 1.5f64..5.0, z in 0.0f64..0.999, dz in 1e-6f64..1e-3) {
            let lo = polylog_bose(s, z).unwrap();
            let hi = polylog_bose(s, (z + dz).min(1.0)).unwrap();
            prop_assert!(hi > lo);
        }
    }
}
