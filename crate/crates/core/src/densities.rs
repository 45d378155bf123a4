//! Spherically symmetric densities on `R^p`: scale mixtures of normals and
//! general radial densities.

use crate::error::{invalid, Error, Result};
use crate::quad::PositiveRule;
use crate::scalar::Scalar;
use crate::special::{norm_cdf, FRAC_1_SQRT_2PI};
pub use crate::mixing::MixingLaw;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Expectation `E[V^{-s} g(V)]` arranged as `norm · E_tilted[g(V)]`, where the
/// tilted law absorbs the `v^{-s}` singularity at the origin.
#[derive(Clone)]
struct TiltedKernel {
    s: f64,
    norm: f64,
    rule: Option<Arc<PositiveRule>>,
}

impl TiltedKernel {
    fn new(law: &MixingLaw, s: f64) -> Result<Self> {
        if s == 0.0 {
            return Ok(Self { s, norm: 1.0, rule: law.rule().map(Arc::new) });
        }
        match law.tilted(s)? {
            Some((norm, tilted)) => Ok(Self { s, norm, rule: tilted.rule().map(Arc::new) }),
            None => {
                law.check_inverse_moment(s)?;
                let rule = law.rule().map(|r| {
                    let weights = r.nodes.iter().zip(&r.weights).map(|(v, w)| w * v.powf(-s)).collect();
                    Arc::new(PositiveRule { nodes: r.nodes, weights })
                });
                Ok(Self { s, norm: 1.0, rule })
            }
        }
    }

    fn expect<F: Fn(f64) -> f64>(&self, law: &MixingLaw, g: F) -> f64 {
        match &self.rule {
            Some(rule) => self.norm * rule.expect(g),
            None => law.expect(|v| v.powf(-self.s) * g(v)),
        }
    }
}

/// A `p`-variate scale mixture of normals `∫ (2πv)^{-p/2} e^{-‖t‖²/2v} dG(v)`.
///
/// Construction checks that `E[V^{-p/2}]` is finite, which makes the density
/// bounded.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "SmnRepr", into = "SmnRepr")]
pub struct SmnDensity {
    dim: usize,
    mixing: MixingLaw,
    radial: TiltedKernel,
    marginal: TiltedKernel,
    plain: TiltedKernel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SmnRepr {
    dim: usize,
    mixing: MixingLaw,
}

impl TryFrom<SmnRepr> for SmnDensity {
    type Error = Error;

    fn try_from(r: SmnRepr) -> Result<Self> {
        SmnDensity::new(r.dim, r.mixing)
    }
}

impl From<SmnDensity> for SmnRepr {
    fn from(d: SmnDensity) -> Self {
        SmnRepr { dim: d.dim, mixing: d.mixing }
    }
}

impl fmt::Debug for SmnDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmnDensity").field("dim", &self.dim).field("mixing", &self.mixing).finish()
    }
}

impl PartialEq for SmnDensity {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.mixing == other.mixing
    }
}

impl SmnDensity {
    pub fn new(dim: usize, mixing: MixingLaw) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        mixing.validate()?;
        let radial = TiltedKernel::new(&mixing, dim as f64 / 2.0)?;
        let marginal = TiltedKernel::new(&mixing, 0.5)?;
        let plain = TiltedKernel::new(&mixing, 0.0)?;
        Ok(Self { dim, mixing, radial, marginal, plain })
    }

    /// `N_p(0, σ² I)`.
    pub fn normal(dim: usize, variance: f64) -> Result<Self> {
        Self::new(dim, MixingLaw::point(variance)?)
    }

    /// Multivariate Student `T(ν, σ)`.
    pub fn student(dim: usize, nu: f64, sigma: f64) -> Result<Self> {
        Self::new(dim, MixingLaw::student(nu, sigma)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mixing(&self) -> &MixingLaw {
        &self.mixing
    }

    /// Density at squared radius `u = ‖t‖²`.
    pub fn eval_radial(&self, u: f64) -> f64 {
        let p = self.dim as f64;
        (2.0 * PI).powf(-p / 2.0) * self.radial.expect(&self.mixing, |v| (-u / (2.0 * v)).exp())
    }

    pub fn eval_density(&self, t: &[f64]) -> Result<f64> {
        self.check_dim(t.len())?;
        Ok(self.eval_radial(f64::norm2(t)))
    }

    /// Density at the origin, `(2π)^{-p/2} E[V^{-p/2}]`.
    pub fn peak(&self) -> f64 {
        self.eval_radial(0.0)
    }

    /// One-dimensional marginal cdf `E[Φ(t/√V)]`.
    pub fn marginal_cdf(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.5;
        }
        self.plain.expect(&self.mixing, |v| norm_cdf(t / v.sqrt()))
    }

    /// One-dimensional marginal density `E[φ(t/√V)/√V]`.
    pub fn marginal_pdf(&self, t: f64) -> f64 {
        FRAC_1_SQRT_2PI * self.marginal.expect(&self.mixing, |v| (-t * t / (2.0 * v)).exp())
    }

    /// Density of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &SmnDensity) -> Result<SmnDensity> {
        self.check_dim(other.dim)?;
        SmnDensity::new(self.dim, MixingLaw::sum(vec![self.mixing.clone(), other.mixing.clone()])?)
    }

    /// Density of `c T` for `T ~ self`, i.e. `c^{-p} f(t/c)`.
    pub fn scaled(&self, c: f64) -> Result<SmnDensity> {
        SmnDensity::new(self.dim, self.mixing.scaled(c * c)?)
    }

    /// One draw of `μ + √V Z`.
    pub fn sample<R: Rng + ?Sized>(&self, mu: &[f64], rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(mu, rng, &mut out);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, mu: &[f64], rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(mu.len(), self.dim);
        let s = self.mixing.sample(rng).sqrt();
        for (o, m) in out.iter_mut().zip(mu) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + s * z;
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, mu: &[f64], n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        self.check_dim(mu.len())?;
        if n == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        Ok((0..n).map(|_| self.sample(mu, rng)).collect())
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got })
        }
    }
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A spherically symmetric density on `R^p` given by its radial profile
/// `g(‖t‖²)`, together with its one-dimensional marginal cdf and density.
#[derive(Clone)]
pub struct RadialDensity {
    dim: usize,
    profile: Callable,
    cdf: Callable,
    pdf: Callable,
}

impl fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialDensity").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl RadialDensity {
    pub fn new(
        dim: usize,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { dim, profile: Arc::new(profile), cdf: Arc::new(cdf), pdf: Arc::new(pdf) })
    }

    pub fn from_smn(d: &SmnDensity) -> Self {
        let (a, b, c) = (d.clone(), d.clone(), d.clone());
        Self {
            dim: d.dim,
            profile: Arc::new(move |u| a.eval_radial(u)),
            cdf: Arc::new(move |t| b.marginal_cdf(t)),
            pdf: Arc::new(move |t| c.marginal_pdf(t)),
        }
    }

    /// `N_p(0, σ² I)` in closed form.
    pub fn normal(dim: usize, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(invalid(format!("variance must be positive, got {variance}")));
        }
        let p = dim as f64;
        let sd = variance.sqrt();
        Self::new(
            dim,
            move |u| (2.0 * PI * variance).powf(-p / 2.0) * (-u / (2.0 * variance)).exp(),
            move |t| norm_cdf(t / sd),
            move |t| FRAC_1_SQRT_2PI / sd * (-t * t / (2.0 * variance)).exp(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Density at squared radius `u`.
    pub fn eval_radial(&self, u: f64) -> f64 {
        (self.profile)(u)
    }

    pub fn marginal_cdf(&self, t: f64) -> f64 {
        (self.cdf)(t)
    }

    pub fn marginal_pdf(&self, t: f64) -> f64 {
        (self.pdf)(t)
    }
}

/// `E[e^{-sZ}]` and `E[Z e^{-sZ}]` for `Z = ‖aX − μ‖²/σ_Y²` with
/// `X ~ N_p(μ, σ_X² I)`.
///
/// `Z / (a² r)` is noncentral chi-square with `p` degrees of freedom and
/// noncentrality `δ = (a−1)² m / (a² r)`, `m = ‖μ‖²/σ_Y²`; equivalently
/// `Z | L ~ Gamma(p/2 + L, 2a²r)` with `L ~ Poisson(δ/2)`. With
/// `θ = 1/(1 + 2a²rs)`:
///
/// ```text
/// E e^{-sZ}   = θ^{p/2} exp(-δ(1-θ)/2)
/// E Z e^{-sZ} = 2a²r θ^{p/2+1} exp(-δ(1-θ)/2) (p/2 + δθ/2)
/// ```
pub fn noncentral_scaled_chisq_laplace<T: Scalar>(p: usize, a: T, r: T, norm_mu2: T, s: T) -> Result<(T, T)> {
    if !(a > T::zero() && a <= T::one()) {
        return Err(invalid("shrink factor must lie in (0, 1]"));
    }
    if !(r > T::zero()) || norm_mu2 < T::zero() || s < T::zero() {
        return Err(invalid("variance ratio must be positive, ‖μ‖² and s nonnegative"));
    }
    let ph = T::from_usize_lossy(p) * T::half();
    let a2r = a * a * r;
    let delta = (a - T::one()).powi(2) * norm_mu2 / a2r;
    let theta = T::one() / (T::one() + T::two() * a2r * s);
    let base = theta.powf(ph) * (-delta * (T::one() - theta) * T::half()).exp();
    let weighted = T::two() * a2r * theta * base * (ph + delta * theta * T::half());
    Ok((base, weighted))
}
