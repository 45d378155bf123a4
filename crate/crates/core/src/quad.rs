//! Numerical integration: adaptive Gauss–Kronrod on finite intervals, a
//! double-exponential rule on the half line, and fixed positive-axis rules
//! used to take expectations over mixing laws.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Composite 15-point Kronrod rule over consecutive breakpoints.
pub fn kronrod_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64]) -> f64 {
    breaks.windows(2).map(|w| gk15(&f, w[0], w[1]).0).sum()
}

/// Adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total
/// estimated error is below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(&f, lo, hi);
    segs.push((lo, hi, v, e));
    for _ in 0..2000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(sign * total);
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (s_lo, s_hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (s_lo + s_hi);
        let (v1, e1) = gk15(&f, s_lo, mid);
        let (v2, e2) = gk15(&f, mid, s_hi);
        segs.push((s_lo, mid, v1, e1));
        segs.push((mid, s_hi, v2, e2));
    }
    let total: f64 = segs.iter().map(|s| s.2).sum();
    let err: f64 = segs.iter().map(|s| s.3).sum();
    if err <= 1e3 * abs_tol.max(rel_tol * total.abs()) {
        Ok(sign * total)
    } else {
        Err(Error::Numerical(format!("quadrature did not converge (error estimate {err:e})")))
    }
}

/// Integral of `f` over `(0, ∞)` with the exp-sinh transform
/// `x = scale * exp(π/2 · sinh t)`, halving the step until two successive
/// levels agree to `rel_tol`.
///
/// Handles integrable algebraic singularities at the origin and algebraic or
/// exponential decay at infinity.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, scale: f64, rel_tol: f64) -> Result<f64> {
    const T_MAX: f64 = 6.5;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| -> f64 {
        let x = scale * (half_pi * t.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        let fx = f(x);
        if fx == 0.0 {
            return 0.0;
        }
        fx * x * half_pi * t.cosh()
    };
    let mut h = 0.5;
    let mut n = (T_MAX / h) as i64;
    let mut sum = term(0.0);
    for k in 1..=n {
        let t = k as f64 * h;
        sum += term(t) + term(-t);
    }
    let mut estimate = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        n *= 2;
        let mut k = 1;
        while k <= n {
            let t = k as f64 * h;
            sum += term(t) + term(-t);
            k += 2;
        }
        let next = sum * h;
        if !next.is_finite() {
            return Err(Error::Numerical("non-finite integrand on half line".into()));
        }
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Numerical(format!("half-line quadrature did not converge (last estimate {estimate:e})")))
}

/// A discrete probability rule `{(v_j, w_j)}` on the positive axis.
///
/// Expectations over a mixing law reduce to `Σ w_j f(v_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Number of nodes in the rule built for continuous mixing laws.
pub const POSITIVE_RULE_NODES: usize = 256;

impl PositiveRule {
    pub fn point(v: f64) -> Self {
        Self { nodes: vec![v], weights: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fixed 256-node rule for a density `pdf` on `(0, ∞)`.
    ///
    /// Works in log coordinates `u = ln v`, centred at `ln(center)`, with the
    /// sinh map `u = ln(center) + width · sinh(t)` and a uniform trapezoid in
    /// `t`. `width` should be the spread of the log-density around its mode;
    /// tails decay double-exponentially in `t`. Weights are renormalised to a
    /// probability rule.
    pub fn from_log_density<F: Fn(f64) -> f64>(ln_pdf: F, center: f64, width: f64) -> Self {
        let t_max = 80f64.asinh();
        let n = POSITIVE_RULE_NODES;
        let h = 2.0 * t_max / (n as f64 - 1.0);
        let c = center.ln();
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            let t = -t_max + j as f64 * h;
            let u = c + width * t.sinh();
            let v = u.exp();
            if !(v > 0.0 && v.is_finite()) {
                continue;
            }
            // dv = v du, du = width cosh(t) dt
            let lw = ln_pdf(v) + u + (width * t.cosh() * h).ln();
            let w = lw.exp();
            if w > 0.0 && w.is_finite() {
                nodes.push(v);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Self { nodes, weights }
    }

    /// Rule of the sum of two independent variables (tensor product).
    pub fn convolve(&self, other: &Self) -> Self {
        let mut nodes = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (a, wa) in self.nodes.iter().zip(&self.weights) {
            for (b, wb) in other.nodes.iter().zip(&other.weights) {
                nodes.push(a + b);
                weights.push(wa * wb);
            }
        }
        Self { nodes, weights }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { nodes: self.nodes.iter().map(|v| v * k).collect(), weights: self.weights.clone() }
    }

    #[inline]
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&v, &w)| w * f(v)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(v, 9.0, max_relative = 1e-13);
        let g = integrate(|x| (-x * x / 2.0).exp(), -12.0, 12.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(g, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x| x.cos(), 1.0, 0.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(v, -(1f64).sin(), max_relative = 1e-12);
    }

    #[test]
    fn half_line_with_endpoint_singularity() {
        // ∫ u^{-1/2} e^{-u} du = Γ(1/2)
        let v = integrate_half_line(|u| u.powf(-0.5) * (-u).exp(), 1.0, 1e-12).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-11);
        // algebraic tail: ∫ 1/(1+u)^2 du = 1
        let w = integrate_half_line(|u| (1.0 + u).powi(-2), 1.0, 1e-12).unwrap();
        assert_relative_eq!(w, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn positive_rule_reproduces_gamma_moments() {
        let alpha: f64 = 3.0;
        let ln_pdf = |v: f64| (alpha - 1.0) * v.ln() - v - crate::special::ln_gamma(alpha);
        let rule = PositiveRule::from_log_density(ln_pdf, alpha, 1.0 / alpha.sqrt());
        assert!(rule.len() > 150 && rule.len() <= POSITIVE_RULE_NODES);
        assert_relative_eq!(rule.expect(|v| v), 3.0, max_relative = 1e-12);
        assert_relative_eq!(rule.expect(|v| 1.0 / v), 0.5, max_relative = 1e-12);
        assert_relative_eq!(rule.expect(|v| v.powf(-1.5)), crate::special::gamma_fn(1.5) / 2.0, max_relative = 1e-10);
    }
}
