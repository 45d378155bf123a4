//! Closed-form risks and cutoffs for the normal model
//! `X ~ N_p(μ, σ_X² I)`, `Y ~ N_p(μ, σ_Y² I)`.

use crate::error::{invalid, Error, Result};
use crate::roots::{expand_and_bisect, Root};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalModel<T = f64> {
    pub p: usize,
    pub sx2: T,
    pub sy2: T,
}

impl<T: Scalar> NormalModel<T> {
    pub fn new(p: usize, sx2: T, sy2: T) -> Result<Self> {
        if p == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(sx2 > T::zero() && sy2 > T::zero() && sx2.is_finite() && sy2.is_finite()) {
            return Err(invalid(format!("variances must be positive, got {sx2} and {sy2}")));
        }
        Ok(Self { p, sx2, sy2 })
    }

    /// Unit observation variance with `σ_X² = r`.
    pub fn with_ratio(p: usize, r: T) -> Result<Self> {
        Self::new(p, r, T::one())
    }

    /// Variance ratio `r = σ_X²/σ_Y²`.
    pub fn r(&self) -> T {
        self.sx2 / self.sy2
    }

    fn half_p(&self) -> T {
        T::from_usize_lossy(self.p) * T::half()
    }

    /// `(2πσ_Y²)^{-p/2}`.
    fn unit(&self) -> T {
        (T::two() * T::PI() * self.sy2).powf(-self.half_p())
    }
}

fn positive<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {x}")))
    }
}

/// Risk of the plug-in `N(X, c²σ_Y² I)`, constant in `μ`:
/// `(2πσ_Y²)^{-p/2}[(1/2)^{p/2} + (2c²)^{-p/2} − 2(r+c²+1)^{-p/2}]`.
pub fn risk_qc_normal<T: Scalar>(m: &NormalModel<T>, c2: T) -> Result<T> {
    positive("c²", c2)?;
    let e = -m.half_p();
    let two = T::two();
    Ok(m.unit() * (two.recip().powf(-e) + (two * c2).powf(e) - two * (m.r() + c2 + T::one()).powf(e)))
}

/// Minimax risk of the MRE density `N(X, (σ_X²+σ_Y²) I)`:
/// `(4πσ_Y²)^{-p/2} − (4π(σ_X²+σ_Y²))^{-p/2}`.
pub fn risk_mre_normal<T: Scalar>(m: &NormalModel<T>) -> T {
    let e = -m.half_p();
    let four_pi = T::lit(4.0) * T::PI();
    (four_pi * m.sy2).powf(e) - (four_pi * (m.sx2 + m.sy2)).powf(e)
}

fn shrink_terms<T: Scalar>(m: &NormalModel<T>, a: T, c2: T, norm_mu2: T) -> Result<(T, T)> {
    if !(a > T::zero() && a <= T::one()) {
        return Err(invalid(format!("shrink factor must lie in (0, 1], got {a}")));
    }
    positive("c²", c2)?;
    if norm_mu2 < T::zero() {
        return Err(invalid("‖μ‖² must be nonnegative"));
    }
    let k = a * a * m.r() + c2 + T::one();
    let h = (a - T::one()).powi(2) * norm_mu2 / (m.sy2 * k);
    Ok((k, h))
}

/// Risk of `N(aX, c²σ_Y² I)` at `‖μ‖² = norm_mu2`.
pub fn risk_qc_ax_normal<T: Scalar>(m: &NormalModel<T>, a: T, c2: T, norm_mu2: T) -> Result<T> {
    let (k, h) = shrink_terms(m, a, c2, norm_mu2)?;
    let e = -m.half_p();
    let two = T::two();
    Ok(m.unit() * (two.recip().powf(-e) + (two * c2).powf(e) - two * k.powf(e) * (-h * T::half()).exp()))
}

/// Derivative of [`risk_qc_ax_normal`] in `c²`:
/// `(2πσ_Y²)^{-p/2} K^{-p/2-1}[(p−h)e^{-h/2} − p(K/2c²)^{p/2+1}]`, `K = a²r+c²+1`.
pub fn psi_a<T: Scalar>(m: &NormalModel<T>, a: T, c2: T, norm_mu2: T) -> Result<T> {
    let (k, h) = shrink_terms(m, a, c2, norm_mu2)?;
    let p = T::from_usize_lossy(m.p);
    let e1 = m.half_p() + T::one();
    Ok(m.unit() * k.powf(-e1) * ((p - h) * (-h * T::half()).exp() - p * (k / (T::two() * c2)).powf(e1)))
}

/// `2 log 2 / log(1 + a²r/2)`: for `p ≥ p0(a)` every expansion `c² > 1` helps.
pub fn p0a_threshold<T: Scalar>(a: T, r: T) -> Result<T> {
    positive("variance ratio", r)?;
    if !(a > T::zero() && a <= T::one()) {
        return Err(invalid(format!("shrink factor must lie in (0, 1], got {a}")));
    }
    let two = T::two();
    Ok(two * two.ln() / (T::one() + a * a * r / two).ln())
}

pub fn p0_threshold<T: Scalar>(r: T) -> Result<T> {
    p0a_threshold(T::one(), r)
}

/// Left side of the cutoff equation for `N(aX, c²σ_Y² I)` against `c² = 1`:
/// `(1/2)^{p/2} + 2(c²+a²r+1)^{-p/2} − 2(a²r+2)^{-p/2} − (2c²)^{-p/2}`.
/// Positive exactly on `(1, k_a(p))`.
pub fn cutoff_equation<T: Scalar>(p: usize, r: T, a: T, c2: T) -> T {
    let e = -T::from_usize_lossy(p) * T::half();
    let two = T::two();
    let ar = a * a * r;
    two.recip().powf(-e) + two * (c2 + ar + T::one()).powf(e) - two * (ar + two).powf(e) - (two * c2).powf(e)
}

/// `k_a(p)`, or `None` when it is infinite.
pub fn threshold_ka_root<T: Scalar>(p: usize, r: T, a: T) -> Result<Option<Root<T>>> {
    if p == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let p0 = p0a_threshold(a, r)?;
    if T::from_usize_lossy(p) >= p0 {
        return Ok(None);
    }
    let lo = T::one() + T::lit(1e-9);
    let root = expand_and_bisect(|c2| cutoff_equation(p, r, a, c2), lo, T::two(), 2000)?;
    Ok(Some(root))
}

/// Ratio of the plug-in risk to the MRE risk,
/// `2(1 − (1+r/2)^{-p/2}) / (1 − (1+r)^{-p/2})`.
pub fn mre_plugin_risk_ratio<T: Scalar>(m: &NormalModel<T>) -> T {
    let e = -m.half_p();
    let r = m.r();
    T::two() * (T::one() - (T::one() + r * T::half()).powf(e)) / (T::one() - (T::one() + r).powf(e))
}

/// `c² = 1 − r`, the expansion making `N(X, c²σ_Y² I)` unbiased for the
/// density of `Y`; exists only when `σ_X² < σ_Y²`.
pub fn unbiased_c2<T: Scalar>(m: &NormalModel<T>) -> Result<T> {
    let r = m.r();
    if r < T::one() {
        Ok(T::one() - r)
    } else {
        Err(Error::Nonexistent(format!("no unbiased expansion when σ_X² ≥ σ_Y² (r = {r})")))
    }
}

/// `σ_Z² = (2σ_Y² + σ_X²)σ_X² / (2(σ_Y² + σ_X²))`, the variance of the
/// auxiliary normal problem to which shrinkage of the MRE density reduces.
pub fn stein_transfer_variance<T: Scalar>(sx2: T, sy2: T) -> Result<T> {
    positive("σ_X²", sx2)?;
    positive("σ_Y²", sy2)?;
    Ok((T::two() * sy2 + sx2) * sx2 / (T::two() * (sy2 + sx2)))
}

/// Largest Baranchik multiplier `2(p−2)σ_Z²` certified for the shrunk MRE density.
pub fn baranchik_cap<T: Scalar>(p: usize, sx2: T, sy2: T) -> Result<T> {
    if p < 3 {
        return Err(invalid("Baranchik shrinkage needs p ≥ 3"));
    }
    Ok(T::two() * T::from_usize_lossy(p - 2) * stein_transfer_variance(sx2, sy2)?)
}

/// Baranchik caps for the L1 plug-in in the normal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1NormalBound<T = f64> {
    /// `(p−2)(p−3)/p · 8σ_X²σ_Y²/(σ_X²+4σ_Y²)`.
    pub general_route: T,
    /// `2(p−3) z0`.
    pub dual_route: T,
    /// `z0 = 4σ_X²σ_Y²/(σ_X²+4σ_Y²)`.
    pub z0: T,
}

pub fn l1_bound_normal<T: Scalar>(m: &NormalModel<T>) -> Result<L1NormalBound<T>> {
    if m.p < 4 {
        return Err(invalid(format!("L1 Baranchik bounds need p ≥ 4, got {}", m.p)));
    }
    let p = T::from_usize_lossy(m.p);
    let four = T::lit(4.0);
    let z0 = four * m.sx2 * m.sy2 / (m.sx2 + four * m.sy2);
    let three = T::lit(3.0);
    Ok(L1NormalBound {
        general_route: (p - T::two()) * (p - three) / p * T::two() * z0,
        dual_route: T::two() * (p - three) * z0,
        z0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn unit(p: usize) -> NormalModel {
        NormalModel::new(p, 1.0, 1.0).unwrap()
    }

    #[test]
    fn plugin_risk_examples() {
        let m = unit(2);
        assert_abs_diff_eq!(risk_qc_normal(&m, 2.0).unwrap(), 0.039_788_7, epsilon = 1e-7);
        assert_relative_eq!(risk_qc_normal(&m, 2.0).unwrap(), 1.0 / (8.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(risk_qc_normal(&m, 1.0).unwrap(), 1.0 / (6.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(risk_qc_normal(&m, 6.0).unwrap(), 1.0 / (6.0 * PI), max_relative = 1e-13);
    }

    #[test]
    fn plugin_risk_minimised_at_one_plus_r() {
        for &(p, r) in &[(1usize, 0.5), (2, 1.0), (3, 2.0), (6, 0.3)] {
            let m = NormalModel::new(p, r, 1.0).unwrap();
            let best = risk_qc_normal(&m, 1.0 + r).unwrap();
            assert_relative_eq!(best, risk_mre_normal(&m), max_relative = 1e-12);
            let grid: Vec<f64> = (1..400).map(|k| 0.02 * k as f64).collect();
            for w in grid.windows(2) {
                let (a, b) = (risk_qc_normal(&m, w[0]).unwrap(), risk_qc_normal(&m, w[1]).unwrap());
                if w[1] <= 1.0 + r {
                    assert!(b < a, "not decreasing at c²={}", w[1]);
                } else if w[0] >= 1.0 + r {
                    assert!(b > a, "not increasing at c²={}", w[1]);
                }
            }
        }
    }

    #[test]
    fn mre_risk_examples() {
        assert_abs_diff_eq!(risk_mre_normal(&unit(1)), 0.082_623_65, epsilon = 1e-8);
        assert_relative_eq!(risk_mre_normal(&unit(2)), 1.0 / (8.0 * PI), max_relative = 1e-14);
        let tiny = NormalModel::new(3, 1e-12, 1.0).unwrap();
        assert!(risk_mre_normal(&tiny) < 1e-12);
    }

    #[test]
    fn shrunk_risk_reduces_at_a_one() {
        for p in 1..6 {
            let m = NormalModel::new(p, 0.7, 1.3).unwrap();
            for &mu2 in &[0.0, 1.0, 17.0] {
                assert_relative_eq!(
                    risk_qc_ax_normal(&m, 1.0, 2.2, mu2).unwrap(),
                    risk_qc_normal(&m, 2.2).unwrap(),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn psi_is_the_derivative_and_negative_at_one() {
        let m = NormalModel::new(3, 1.0, 1.0).unwrap();
        for &(a, c2, mu2) in &[(0.5, 1.0, 4.0), (0.8, 2.5, 0.0), (0.3, 7.0, 30.0)] {
            let h = 1e-6;
            let fd = (risk_qc_ax_normal(&m, a, c2 + h, mu2).unwrap() - risk_qc_ax_normal(&m, a, c2 - h, mu2).unwrap()) / (2.0 * h);
            assert_relative_eq!(psi_a(&m, a, c2, mu2).unwrap(), fd, max_relative = 1e-6);
        }
        for p in 1..8 {
            for &r in &[0.2, 1.0, 5.0] {
                let m = NormalModel::new(p, r, 1.0).unwrap();
                for &a in &[0.1, 0.5, 0.9, 1.0] {
                    for &mu2 in &[0.0, 0.5, 10.0, 1e3] {
                        assert!(psi_a(&m, a, 1.0, mu2).unwrap() < 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn optimal_expansion_at_origin() {
        let m = NormalModel::new(3, 1.4, 1.0).unwrap();
        let a: f64 = 0.6;
        let c2 = 1.0 + a * a * 1.4;
        assert_abs_diff_eq!(psi_a(&m, a, c2, 0.0).unwrap(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn threshold_examples() {
        let k2 = threshold_ka_root(2, 1.0, 1.0).unwrap().unwrap();
        assert_abs_diff_eq!(k2.value, 6.0, epsilon = 1e-9);
        let k1 = threshold_ka_root(1, 1.0, 1.0).unwrap().unwrap().value;
        assert!((4.64..=4.66).contains(&k1), "{k1}");
        let k3 = threshold_ka_root(3, 1.0, 1.0).unwrap().unwrap().value;
        assert!((11.46..=11.48).contains(&k3), "{k3}");
        assert!(threshold_ka_root(4, 1.0, 1.0).unwrap().is_none());
    }

    #[test]
    fn threshold_root_brackets_zero() {
        for &(p, r, a) in &[(1usize, 1.0f64, 1.0f64), (2, 1.0, 0.5), (3, 0.5, 0.8), (2, 0.2, 1.0)] {
            let k = threshold_ka_root(p, r, a).unwrap().unwrap();
            assert!(k.residual.abs() <= 1e-9);
            let f = |c2| cutoff_equation(p, r, a, c2);
            assert!(f(k.value * (1.0 - 1e-3)) > 0.0 && f(k.value * (1.0 + 1e-3)) < 0.0);
            assert!(k.value >= 1.0 + a * a * r);
        }
    }

    #[test]
    fn threshold_runs_in_single_precision() {
        let k = threshold_ka_root(2usize, 1.0f32, 1.0).unwrap().unwrap();
        assert!((k.value - 6.0).abs() < 1e-4);
    }

    #[test]
    fn p0_examples() {
        assert_abs_diff_eq!(p0_threshold(1.0).unwrap(), 3.419, epsilon = 1e-3);
        assert_eq!(p0_threshold(2.0).unwrap(), 2.0);
        assert_eq!(p0a_threshold(1.0, 0.7).unwrap(), p0_threshold(0.7).unwrap());
        let mut prev = f64::INFINITY;
        for k in 1..50 {
            let v = p0_threshold(0.1 * k as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn risk_ratio_examples() {
        assert_relative_eq!(mre_plugin_risk_ratio(&unit(2)), 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            mre_plugin_risk_ratio(&unit(2)),
            risk_qc_normal(&unit(2), 1.0).unwrap() / risk_qc_normal(&unit(2), 2.0).unwrap(),
            max_relative = 1e-13
        );
        assert_abs_diff_eq!(mre_plugin_risk_ratio(&NormalModel::new(2, 1e9, 1.0).unwrap()), 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(mre_plugin_risk_ratio(&unit(400)), 2.0, epsilon = 1e-12);
        let mut prev = 0.0;
        for p in 1..30 {
            let v = mre_plugin_risk_ratio(&unit(p));
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn unbiased_examples() {
        assert_eq!(unbiased_c2(&NormalModel::new(2, 0.5, 1.0).unwrap()).unwrap(), 0.5);
        assert!(matches!(unbiased_c2(&unit(2)), Err(Error::Nonexistent(_))));
        assert!(unbiased_c2(&NormalModel::new(2, 3.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn stein_transfer_examples() {
        assert_eq!(stein_transfer_variance(1.0, 1.0).unwrap(), 0.75);
        assert_eq!(baranchik_cap(3, 1.0, 1.0).unwrap(), 1.5);
        assert!(stein_transfer_variance(1e-12, 1.0).unwrap() < 1e-11);
        assert!(baranchik_cap(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn l1_normal_examples() {
        let b = l1_bound_normal(&unit(5)).unwrap();
        assert_abs_diff_eq!(b.general_route, 1.92, epsilon = 1e-12);
        assert_abs_diff_eq!(b.dual_route, 3.2, epsilon = 1e-12);
        assert_abs_diff_eq!(b.dual_route / b.general_route, 5.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.z0, 0.8, epsilon = 1e-15);
        assert!(l1_bound_normal(&unit(3)).is_err());
    }
}
