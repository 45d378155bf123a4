//! Bracketing root finders and golden-section minimisation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of a bracketing root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub value: T,
    pub lo: T,
    pub hi: T,
    pub residual: T,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must have opposite signs.
/// Runs to machine resolution.
pub fn bisect<T: Scalar, F: Fn(T) -> T>(f: F, lo: T, hi: T) -> Result<Root<T>> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(Root { value: lo, lo, hi: lo, residual: flo, iterations: 0 });
    }
    if fhi == T::zero() {
        return Ok(Root { value: hi, lo: hi, hi, residual: fhi, iterations: 0 });
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Numerical("bisection requires a sign change on the bracket".into()));
    }
    let mut it = 0;
    while it < 2000 {
        it += 1;
        let mid = lo + (hi - lo) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(Root { value: mid, lo: mid, hi: mid, residual: fm, iterations: it });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mid = lo + (hi - lo) * T::half();
    Ok(Root { value: mid, lo, hi, residual: f(mid), iterations: it })
}

/// Bisection after expanding the upper end of `[lo, hi]` by doubling until
/// the sign of `f` differs from `f(lo)`.
pub fn expand_and_bisect<T: Scalar, F: Fn(T) -> T>(f: F, lo: T, hi: T, max_doublings: usize) -> Result<Root<T>> {
    let flo = f(lo);
    let mut hi = hi;
    let mut k = 0;
    while f(hi).signum() == flo.signum() {
        k += 1;
        if k > max_doublings {
            return Err(Error::Numerical(format!(
                "no sign change found up to {}",
                hi.to_f64().unwrap_or(f64::NAN)
            )));
        }
        hi = hi * T::two();
    }
    bisect(f, lo, hi)
}

/// Golden-section search for the minimiser of a unimodal `f` on `[a, b]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two_f64_and_f32() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-15);
        let r32 = bisect(|x: f32| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r32.value - 2f32.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn bisect_rejects_bracket_without_sign_change() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn expanding_bracket_finds_distant_root() {
        let r = expand_and_bisect(|x: f64| 100.0 - x, 1.0, 2.0, 64).unwrap();
        assert!((r.value - 100.0).abs() < 1e-12);
        assert!(r.lo <= 100.0 && r.hi >= 100.0);
    }

    #[test]
    fn golden_section_quadratic() {
        let x = golden_section_min(|x| (x - 0.3).powi(2), -2.0, 5.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
