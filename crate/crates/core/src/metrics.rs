//! Distances between predictive densities and the true density, and the
//! point-estimation losses they reduce to.

use crate::densities::{RadialDensity, SmnDensity};
use crate::error::{invalid, Error, Result};
use crate::mixing::MixingLaw;
use crate::scalar::{std_normal_pdf, Scalar};
use serde::{Deserialize, Serialize};

/// A spherically symmetric density with accessible radial profile and
/// one-dimensional marginal.
pub trait Spherical {
    fn dim(&self) -> usize;
    /// Density at squared radius `u`.
    fn radial(&self, u: f64) -> f64;
    fn cdf(&self, t: f64) -> f64;
    fn pdf(&self, t: f64) -> f64;
}

impl Spherical for SmnDensity {
    fn dim(&self) -> usize {
        SmnDensity::dim(self)
    }
    fn radial(&self, u: f64) -> f64 {
        self.eval_radial(u)
    }
    fn cdf(&self, t: f64) -> f64 {
        self.marginal_cdf(t)
    }
    fn pdf(&self, t: f64) -> f64 {
        self.marginal_pdf(t)
    }
}

impl Spherical for RadialDensity {
    fn dim(&self) -> usize {
        RadialDensity::dim(self)
    }
    fn radial(&self, u: f64) -> f64 {
        self.eval_radial(u)
    }
    fn cdf(&self, t: f64) -> f64 {
        self.marginal_cdf(t)
    }
    fn pdf(&self, t: f64) -> f64 {
        self.marginal_pdf(t)
    }
}

/// Loss functions for density estimates (integrated) and for point
/// estimates (the dual losses).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossSpec {
    L2Integrated,
    L1Integrated,
    /// `1 − exp(−‖d−μ‖²/2γ)`.
    ReflectedNormal { gamma: f64 },
    /// `K − ∫(2πt)^{-p/2} e^{-‖d−μ‖²/2t} dJ(t)` with `K` making the loss vanish at `d = μ`.
    ReflectedSmn { mixing: MixingLaw, dim: usize },
    /// `2F(‖d−μ‖/2) − 1` for the marginal cdf `F` of `density`.
    L1Dual { density: SmnDensity },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            LossSpec::ReflectedNormal { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                Err(invalid(format!("reflected normal γ must be positive, got {gamma}")))
            }
            LossSpec::ReflectedSmn { mixing, dim } => {
                if *dim == 0 {
                    return Err(invalid("dimension must be at least 1"));
                }
                mixing.check_inverse_moment(*dim as f64 / 2.0)
            }
            _ => Ok(()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            LossSpec::L2Integrated => "l2".into(),
            LossSpec::L1Integrated => "l1".into(),
            LossSpec::ReflectedNormal { gamma } => format!("reflected_normal(gamma={gamma})"),
            LossSpec::ReflectedSmn { dim, .. } => format!("reflected_smn(p={dim})"),
            LossSpec::L1Dual { .. } => "l1_dual".into(),
        }
    }

    pub fn is_integrated(&self) -> bool {
        matches!(self, LossSpec::L2Integrated | LossSpec::L1Integrated)
    }

    /// Loss of the point estimate `d` when the truth is `mu`.
    pub fn point_loss(&self, d: &[f64], mu: &[f64]) -> Result<f64> {
        match self {
            LossSpec::ReflectedNormal { gamma } => reflected_normal_loss(*gamma, d, mu),
            LossSpec::ReflectedSmn { mixing, dim } => reflected_smn_loss(mixing, *dim, d, mu),
            LossSpec::L1Dual { density } => l1_dual_loss(density, d, mu),
            _ => Err(Error::Unsupported(format!("{} is a loss on densities, not on point estimates", self.id()))),
        }
    }

    /// Point loss as a function of the squared separation `‖d−μ‖²`.
    pub fn point_loss_sq(&self, u: f64) -> Result<f64> {
        match self {
            LossSpec::ReflectedNormal { gamma } => Ok(-(-u / (2.0 * gamma)).exp_m1()),
            LossSpec::ReflectedSmn { mixing, dim } => {
                let j = SmnDensity::new(*dim, mixing.clone())?;
                Ok(j.peak() - j.eval_radial(u))
            }
            LossSpec::L1Dual { density } => Ok(2.0 * density.marginal_cdf(u.sqrt() / 2.0) - 1.0),
            _ => Err(Error::Unsupported(format!("{} is a loss on densities, not on point estimates", self.id()))),
        }
    }
}

fn same_dim<T>(a: &[T], b: &[T]) -> Result<usize> {
    if a.len() == b.len() {
        Ok(a.len())
    } else {
        Err(Error::DimensionMismatch { expected: a.len(), got: b.len() })
    }
}

fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn check_variance<T: Scalar>(v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("variance must be positive, got {v}")))
    }
}

/// `∫ N(μ1, σ1²I)(y) N(μ2, σ2²I)(y) dy`.
pub fn normal_product_integral<T: Scalar>(mu1: &[T], s1: T, mu2: &[T], s2: T) -> Result<T> {
    let p = same_dim(mu1, mu2)?;
    check_variance(s1)?;
    check_variance(s2)?;
    let tot = s1 + s2;
    Ok(tot.powf(-T::from_usize_lossy(p) * T::half()) * std_normal_pdf(dist2(mu1, mu2) / tot, p))
}

/// Squared L2 distance between `N(μ1, σ1²I)` and `N(μ2, σ2²I)`.
pub fn l2_normal_distance<T: Scalar>(mu1: &[T], s1: T, mu2: &[T], s2: T) -> Result<T> {
    let p = same_dim(mu1, mu2)?;
    let four_pi = T::lit(4.0) * T::PI();
    let e = -T::from_usize_lossy(p) * T::half();
    let cross = normal_product_integral(mu1, s1, mu2, s2)?;
    Ok(((four_pi * s1).powf(e) + (four_pi * s2).powf(e) - T::two() * cross).max(T::zero()))
}

/// Integrated L2 loss of the plug-in `N(μ̂, c²σ_Y² I)` for the truth `N(μ, σ_Y² I)`.
pub fn l2_plugin_loss_normal<T: Scalar>(mu_hat: &[T], mu: &[T], c2: T, sy2: T) -> Result<T> {
    check_variance(c2)?;
    let p = same_dim(mu_hat, mu)?;
    let (offset, scale, gamma) = l2_normal_dual(c2, sy2, p)?;
    Ok(offset + scale * reflected_normal_loss(gamma, mu_hat, mu)?)
}

/// Constants `(dual_offset, dual_scale, γ)` with
/// `L2(N(μ̂, c²σ_Y²I), N(μ, σ_Y²I)) = dual_offset + dual_scale · L_γ(μ̂, μ)`.
pub fn l2_normal_dual<T: Scalar>(c2: T, sy2: T, p: usize) -> Result<(T, T, T)> {
    check_variance(c2)?;
    check_variance(sy2)?;
    let e = -T::from_usize_lossy(p) * T::half();
    let pi = T::PI();
    let four = T::lit(4.0);
    let c21 = c2 + T::one();
    let sp = sy2.powf(e);
    let cross = (T::two() * pi * c21).powf(e);
    let offset = sp * ((four * pi).powf(e) + (four * pi * c2).powf(e) - T::two() * cross);
    Ok((offset, T::two() * sp * cross, c21 * sy2))
}

/// Reflected normal loss `1 − exp(−‖d−μ‖²/2γ)`.
pub fn reflected_normal_loss<T: Scalar>(gamma: T, d: &[T], mu: &[T]) -> Result<T> {
    same_dim(d, mu)?;
    check_variance(gamma)?;
    Ok(-(-dist2(d, mu) / (T::two() * gamma)).exp_m1())
}

/// Squared L2 distance between `f(· − μ2)` and `q(· − μ1)` where `s = μ2 − μ1`:
/// `q∗q(0) + f∗f(0) − 2 q∗f(s)`.
pub fn l2_general_distance(f: &SmnDensity, q: &SmnDensity, s: &[f64]) -> Result<f64> {
    f.check_dim(q.dim())?;
    f.check_dim(s.len())?;
    l2_general_distance_sq(f, q, f64::norm2(s))
}

/// [`l2_general_distance`] as a function of `‖s‖²`.
pub fn l2_general_distance_sq(f: &SmnDensity, q: &SmnDensity, u: f64) -> Result<f64> {
    let qq = q.convolve(q)?.peak();
    let ff = f.convolve(f)?.peak();
    let qf = q.convolve(f)?.eval_radial(u);
    Ok((qq + ff - 2.0 * qf).max(0.0))
}

/// L1 distance `4F(Δ/2) − 2` between two translates of a unimodal spherical
/// density at separation `Δ`.
pub fn l1_distance<D: Spherical + ?Sized>(q: &D, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(invalid(format!("separation must be nonnegative, got {delta}")));
    }
    if delta.is_infinite() {
        return Ok(2.0);
    }
    Ok((4.0 * q.cdf(delta / 2.0) - 2.0).clamp(0.0, 2.0))
}

/// Reflected loss induced by a mixing law `J`, normalised to vanish at `d = μ`.
pub fn reflected_smn_loss(j: &MixingLaw, p: usize, d: &[f64], mu: &[f64]) -> Result<f64> {
    same_dim(d, mu)?;
    if d.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: d.len() });
    }
    let dens = SmnDensity::new(p, j.clone())?;
    Ok((dens.peak() - dens.eval_radial(dist2(d, mu))).max(0.0))
}

/// `2F(‖d−μ‖/2) − 1`.
pub fn l1_dual_loss<D: Spherical + ?Sized>(f: &D, d: &[f64], mu: &[f64]) -> Result<f64> {
    same_dim(d, mu)?;
    Ok((2.0 * f.cdf(dist2(d, mu).sqrt() / 2.0) - 1.0).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma_fn, norm_cdf};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn product_integral_examples() {
        let v = normal_product_integral(&[0.0], 1.0, &[0.0], 1.0).unwrap();
        assert_abs_diff_eq!(v, 0.282_094_8, epsilon = 1e-7);
        let far = normal_product_integral(&[0.0], 1.0, &[60.0], 1.0).unwrap();
        assert!(far < 1e-300);
        let v2 = normal_product_integral(&[0.0, 0.0], 1.0, &[1.0, 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(v2, 0.5 / (2.0 * PI) * (-0.25f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v2, 0.061_975_0, epsilon = 1e-7);
    }

    #[test]
    fn product_integral_against_grid() {
        let h = 0.001;
        let mut s = 0.0;
        for k in -20_000..=20_000 {
            let y = k as f64 * h;
            let a = (-(y * y) / 2.0).exp() / (2.0 * PI).sqrt();
            s += a * a * h;
        }
        assert_abs_diff_eq!(normal_product_integral(&[0.0], 1.0, &[0.0], 1.0).unwrap(), s, epsilon = 1e-12);
    }

    #[test]
    fn l2_normal_distance_examples() {
        assert_eq!(l2_normal_distance(&[1.0, 2.0], 1.5, &[1.0, 2.0], 1.5).unwrap(), 0.0);
        let d = l2_normal_distance(&[0.0], 1.0, &[1.0], 1.0).unwrap();
        assert_abs_diff_eq!(d, 2.0 / (4.0 * PI).sqrt() * (1.0 - (-0.25f64).exp()), epsilon = 1e-15);
        assert_abs_diff_eq!(d, 0.1248, epsilon = 1e-4);
        let d2 = l2_normal_distance(&[0.0, 0.0], 1.0, &[0.0, 0.0], 2.0).unwrap();
        assert_abs_diff_eq!(d2, 0.013_263, epsilon = 1e-6);
        let swapped = l2_normal_distance(&[0.0, 0.0], 2.0, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(d2, swapped);
    }

    #[test]
    fn l2_normal_distance_single_precision() {
        let d = l2_normal_distance(&[0.0f32], 1.0, &[1.0], 1.0).unwrap();
        assert!((d - 0.124_8).abs() < 1e-4);
    }

    #[test]
    fn plugin_loss_examples() {
        assert_abs_diff_eq!(l2_plugin_loss_normal(&[0.3, 0.1], &[0.3, 0.1], 1.0, 1.0).unwrap(), 0.0, epsilon = 1e-16);
        let v = l2_plugin_loss_normal(&[1.0], &[0.0], 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, l2_normal_distance(&[1.0], 1.0, &[0.0], 1.0).unwrap(), epsilon = 1e-15);
        let big = l2_plugin_loss_normal(&[1.0, 0.0, 0.0], &[0.0; 3], 1e12, 1.0).unwrap();
        assert_relative_eq!(big, (4.0 * PI).powf(-1.5), max_relative = 1e-12);
        for &c2 in &[0.3, 1.0, 2.5] {
            for &sy2 in &[0.5, 2.0] {
                let a = l2_plugin_loss_normal(&[0.4, -1.0], &[1.0, 0.2], c2, sy2).unwrap();
                let b = l2_normal_distance(&[1.0, 0.2], sy2, &[0.4, -1.0], c2 * sy2).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn reflected_normal_examples() {
        assert_eq!(reflected_normal_loss(2.0, &[1.0], &[1.0]).unwrap(), 0.0);
        let g: f64 = 1.7;
        let v = reflected_normal_loss(g, &[(2.0 * g).sqrt(), 0.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v, 0.632_120_6, epsilon = 1e-7);
        assert_eq!(reflected_normal_loss(1.0, &[1e3], &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn general_distance_reduces_to_normal() {
        for p in 1..=4 {
            let f = SmnDensity::normal(p, 0.7).unwrap();
            let q = SmnDensity::normal(p, 1.9).unwrap();
            let mut s = vec![0.0; p];
            s[0] = 1.3;
            let g = l2_general_distance(&f, &q, &s).unwrap();
            let n = l2_normal_distance(&vec![0.0; p], 1.9, &s, 0.7).unwrap();
            assert_abs_diff_eq!(g, n, epsilon = 1e-10);
        }
        let q = SmnDensity::student(2, 5.0, 1.0).unwrap();
        assert_abs_diff_eq!(l2_general_distance(&q, &q, &[0.0, 0.0]).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn general_distance_symmetries() {
        let f = SmnDensity::new(2, MixingLaw::gamma(3.0, 0.5).unwrap()).unwrap();
        let q = SmnDensity::student(2, 4.0, 1.2).unwrap();
        let a = l2_general_distance(&f, &q, &[0.7, -0.4]).unwrap();
        let b = l2_general_distance(&q, &f, &[0.7, -0.4]).unwrap();
        let c = l2_general_distance(&f, &q, &[-0.7, 0.4]).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_relative_eq!(a, c, max_relative = 1e-12);
    }

    #[test]
    fn student_distance_against_grid() {
        let q = SmnDensity::student(2, 5.0, 1.0).unwrap();
        let norm = gamma_fn(3.5) / (gamma_fn(2.5) * 5.0 * PI);
        let dens = |x: f64, y: f64| norm * (1.0 + (x * x + y * y) / 5.0).powf(-3.5);
        let h = 0.02;
        let n = (24.0 / h) as i64;
        let mut s = 0.0;
        for i in -n..=n {
            let x = i as f64 * h;
            for j in -n..=n {
                let y = j as f64 * h;
                let d = dens(x, y) - dens(x - 1.0, y);
                s += d * d;
            }
        }
        s *= h * h;
        assert_abs_diff_eq!(l2_general_distance(&q, &q, &[1.0, 0.0]).unwrap(), s, epsilon = 1e-4);
    }

    #[test]
    fn l1_distance_examples() {
        let n = SmnDensity::normal(3, 1.0).unwrap();
        assert_eq!(l1_distance(&n, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(l1_distance(&n, 2.0).unwrap(), 1.365_378_9, epsilon = 1e-7);
        assert_abs_diff_eq!(l1_distance(&n, 2.0).unwrap(), 4.0 * norm_cdf(1.0) - 2.0, epsilon = 1e-14);
        assert_eq!(l1_distance(&n, f64::INFINITY).unwrap(), 2.0);
        assert!(l1_distance(&n, 80.0).unwrap() > 2.0 - 1e-12);
        let h = 0.0005;
        let mut s = 0.0;
        for k in -40_000..=40_000 {
            let y = k as f64 * h;
            let a = (-(y * y) / 2.0).exp() - (-((y - 2.0).powi(2)) / 2.0).exp();
            s += a.abs() * h / (2.0 * PI).sqrt();
        }
        assert_abs_diff_eq!(l1_distance(&n, 2.0).unwrap(), s, epsilon = 1e-6);
    }

    fn second_differences_nonpositive(f: impl Fn(f64) -> f64) {
        let grid: Vec<f64> = (0..40).map(|k| 0.01 * 1.25f64.powi(k)).collect();
        for w in grid.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let slope1 = (f(b) - f(a)) / (b - a);
            let slope2 = (f(c) - f(b)) / (c - b);
            assert!(slope2 <= slope1 + 1e-12, "not concave near {b}");
        }
    }

    #[test]
    fn dual_losses_concave_in_squared_separation() {
        let n = SmnDensity::student(1, 3.0, 1.0).unwrap();
        second_differences_nonpositive(|u| l1_distance(&n, u.sqrt()).unwrap());
        second_differences_nonpositive(|u| reflected_normal_loss(1.5, &[u.sqrt()], &[0.0]).unwrap());
        let j = MixingLaw::gamma(4.0, 1.0).unwrap();
        second_differences_nonpositive(|u| reflected_smn_loss(&j, 3, &[u.sqrt(), 0.0, 0.0], &[0.0; 3]).unwrap());
    }

    #[test]
    fn reflected_smn_examples() {
        let j = MixingLaw::gamma(3.0, 1.0).unwrap();
        assert_eq!(reflected_smn_loss(&j, 2, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        let g = 1.3;
        let d = [0.9, -0.2, 0.4];
        let pm = reflected_smn_loss(&MixingLaw::point(g).unwrap(), 3, &d, &[0.0; 3]).unwrap();
        let rn = reflected_normal_loss(g, &d, &[0.0; 3]).unwrap();
        assert_relative_eq!(pm, (2.0 * PI * g).powf(-1.5) * rn, max_relative = 1e-13);
    }

    #[test]
    fn reflected_smn_against_monte_carlo() {
        let j = MixingLaw::Sum(vec![MixingLaw::PointMass(1.0), MixingLaw::gamma(2.0, 1.0).unwrap(), MixingLaw::gamma(3.0, 0.5).unwrap()]);
        let d = [1.0, 0.0, 0.0];
        let exact = reflected_smn_loss(&j, 3, &d, &[0.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 400_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let t = j.sample(&mut rng);
                (2.0 * PI * t).powf(-1.5) * (-(-1.0 / (2.0 * t)).exp_m1())
            })
            .collect();
        let m = vals.iter().sum::<f64>() / n as f64;
        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((m - exact).abs() < 3.0 * (v / n as f64).sqrt(), "{m} vs {exact}");
        // three unit point masses collapse to a point mass at 3
        let three = MixingLaw::sum(vec![MixingLaw::PointMass(1.0); 3]).unwrap();
        let v3 = reflected_smn_loss(&three, 3, &d, &[0.0; 3]).unwrap();
        assert_relative_eq!(v3, (6.0 * PI).powf(-1.5) * (-(-1.0f64 / 6.0).exp_m1()), max_relative = 1e-13);
    }

    #[test]
    fn l1_dual_examples() {
        let n = SmnDensity::normal(1, 1.0).unwrap();
        assert_eq!(l1_dual_loss(&n, &[0.5], &[0.5]).unwrap(), 0.0);
        assert_abs_diff_eq!(l1_dual_loss(&n, &[2.0], &[0.0]).unwrap(), 0.682_689_5, epsilon = 1e-7);
        assert_abs_diff_eq!(l1_dual_loss(&n, &[2.0], &[0.0]).unwrap(), l1_distance(&n, 2.0).unwrap() / 2.0, epsilon = 1e-15);
        assert_eq!(l1_dual_loss(&n, &[1e4], &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn loss_spec_json() {
        let specs = [
            LossSpec::L2Integrated,
            LossSpec::ReflectedNormal { gamma: 2.0 },
            LossSpec::L1Dual { density: SmnDensity::normal(1, 1.0).unwrap() },
            LossSpec::ReflectedSmn { mixing: MixingLaw::gamma(3.0, 1.0).unwrap(), dim: 2 },
        ];
        for s in specs {
            let back: LossSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
            assert_eq!(back, s);
        }
        let r: LossSpec = serde_json::from_str(r#"{"kind":"reflected_normal","gamma":2}"#).unwrap();
        assert_eq!(r.point_loss(&[0.0], &[0.0]).unwrap(), 0.0);
        assert!(LossSpec::L1Integrated.point_loss(&[0.0], &[0.0]).is_err());
        assert!(LossSpec::ReflectedNormal { gamma: -1.0 }.validate().is_err());
    }
}
