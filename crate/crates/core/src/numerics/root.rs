//! Bracketed root finding (Brent: inverse quadratic / secant steps with a
//! bisection fallback). Deterministic for a given function and bracket.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

/// Finds a root of `f` inside `[lo, hi]` to within `tol` in x.
///
/// Requires `f(lo) * f(hi) <= 0`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(Error::domain(format!(
            "invalid bracket ({a}, {b}) or tolerance {tol}"
        )));
    }
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::domain("function is NaN at a bracket end"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::domain(format!(
            "bracket ({a}, {b}) does not enclose a sign change: f = ({fa:e}, {fb:e})"
        )));
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::domain(format!("function is NaN at {b}")));
        }
    }
    Err(Error::Convergence {
        quantity: "bracketed root".into(),
        estimate: b,
        error: (c - b).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear() {
        let x = find_root(|x| x - 2.0, (0.0, 5.0), 1e-14).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exponential() {
        let x = find_root(|x: f64| x.exp() - 3.0, (0.0, 2.0), 1e-14).unwrap();
        assert!((x - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn reversed_bracket_and_decreasing_function() {
        let x = find_root(|x: f64| 1.0 - x * x, (3.0, 0.0), 1e-14).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_bracket() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, (-1.0, 1.0), 1e-12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn steep_square_root_onset() {
        // f has infinite slope at the root, like a Bose density near its edge
        let x = find_root(|x: f64| x.max(0.0).sqrt() - 1e-6, (0.0, 1.0), 1e-20).unwrap();
        assert!((x - 1e-12).abs() < 1e-18);
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| x.powi(3) - 2.0 * x - 5.0;
        let a = find_root(f, (2.0, 3.0), 1e-15).unwrap();
        let b = find_root(f, (2.0, 3.0), 1e-15).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
