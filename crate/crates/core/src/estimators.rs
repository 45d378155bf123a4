//! Predictive density estimators and the point estimators that locate them.

use crate::densities::SmnDensity;
use crate::error::{invalid, Error, Result};
use crate::metrics::LossSpec;
use crate::quad::kronrod_panels;
use crate::roots::golden_section_min;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::{Arc, Mutex};

/// The function `r` of a Baranchik rule `(1 − a r(‖x‖²)/‖x‖²) x`.
#[derive(Clone)]
pub enum ShrinkFn {
    /// `r ≡ 1` (James–Stein form).
    One,
    /// `r(t) = t/(1+t)`.
    TOverOnePlusT,
    Custom { name: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl ShrinkFn {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let r = ShrinkFn::Custom { name: name.into(), f: Arc::new(f) };
        r.validate()?;
        Ok(r)
    }

    pub fn name(&self) -> &str {
        match self {
            ShrinkFn::One => "one",
            ShrinkFn::TOverOnePlusT => "t_over_1pt",
            ShrinkFn::Custom { name, .. } => name,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(ShrinkFn::One),
            "t_over_1pt" => Ok(ShrinkFn::TOverOnePlusT),
            other => Err(invalid(format!("unknown shrinkage function {other:?} (known: one, t_over_1pt)"))),
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ShrinkFn::One => 1.0,
            ShrinkFn::TOverOnePlusT => t / (1.0 + t),
            ShrinkFn::Custom { f, .. } => f(t),
        }
    }

    /// `r(t)/t`, continuous at `t = 0` where the limit exists.
    #[inline]
    fn ratio(&self, t: f64) -> f64 {
        match self {
            ShrinkFn::TOverOnePlusT => 1.0 / (1.0 + t),
            _ => self.eval(t) / t,
        }
    }

    /// Checks `0 ≤ r ≤ 1`, `r` nondecreasing and `r(t)/t` nonincreasing on a
    /// 64-point logarithmic grid over `[1e-4, 1e4]`.
    pub fn validate(&self) -> Result<()> {
        let grid: Vec<f64> = (0..64).map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 63.0)).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        let tol = 1e-12;
        for (k, &v) in vals.iter().enumerate() {
            if !(-tol..=1.0 + tol).contains(&v) {
                return Err(invalid(format!("shrinkage function {} leaves [0,1] at t={}", self.name(), grid[k])));
            }
            if k > 0 {
                if v < vals[k - 1] - tol {
                    return Err(invalid(format!("shrinkage function {} decreases near t={}", self.name(), grid[k])));
                }
                if v / grid[k] > vals[k - 1] / grid[k - 1] * (1.0 + tol) + tol {
                    return Err(invalid(format!("r(t)/t increases near t={} for {}", grid[k], self.name())));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ShrinkFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for ShrinkFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ShrinkFn::Custom { f: a, .. }, ShrinkFn::Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            (a, b) => a.name() == b.name(),
        }
    }
}

impl Serialize for ShrinkFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ShrinkFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        ShrinkFn::from_name(&name).map_err(serde::de::Error::custom)
    }
}

/// A rule `x ↦ μ̂(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointEstimator {
    Identity,
    /// `a x + offset` (`offset` empty means zero).
    LinearShrink {
        a: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        offset: Vec<f64>,
    },
    Baranchik { a: f64, r: ShrinkFn },
    /// Baranchik with `r ≡ 1` and `a = (p−2)σ²`.
    JamesStein { sigma2: f64 },
    #[serde(rename = "positive_part_js")]
    PositivePartJs { sigma2: f64 },
    /// Bayes rule for a uniform prior on `[lo, hi]` under a dual loss, `p = 1`.
    RestrictedBayesUniform(RestrictedBayes),
}

impl PointEstimator {
    pub fn linear(a: f64) -> Result<Self> {
        let e = PointEstimator::LinearShrink { a, offset: Vec::new() };
        e.validate()?;
        Ok(e)
    }

    pub fn baranchik(a: f64, r: ShrinkFn) -> Result<Self> {
        let e = PointEstimator::Baranchik { a, r };
        e.validate()?;
        Ok(e)
    }

    pub fn james_stein(sigma2: f64) -> Result<Self> {
        let e = PointEstimator::JamesStein { sigma2 };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PointEstimator::Identity => Ok(()),
            PointEstimator::LinearShrink { a, .. } => {
                if *a > 0.0 && *a <= 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("linear shrink factor must lie in (0, 1], got {a}")))
                }
            }
            PointEstimator::Baranchik { a, r } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(invalid(format!("Baranchik multiplier must be positive, got {a}")));
                }
                r.validate()
            }
            PointEstimator::JamesStein { sigma2 } | PointEstimator::PositivePartJs { sigma2 } => {
                if *sigma2 > 0.0 && sigma2.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("variance must be positive, got {sigma2}")))
                }
            }
            PointEstimator::RestrictedBayesUniform(rb) => rb.validate(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            PointEstimator::Identity => "identity".into(),
            PointEstimator::LinearShrink { a, offset } if offset.is_empty() => format!("linear(a={a})"),
            PointEstimator::LinearShrink { a, .. } => format!("affine(a={a})"),
            PointEstimator::Baranchik { a, r } => format!("baranchik(a={a},r={})", r.name()),
            PointEstimator::JamesStein { sigma2 } => format!("james_stein(sigma2={sigma2})"),
            PointEstimator::PositivePartJs { sigma2 } => format!("positive_part_js(sigma2={sigma2})"),
            PointEstimator::RestrictedBayesUniform(rb) => {
                format!("restricted_bayes([{}, {}], {})", rb.lo, rb.hi, rb.loss.id())
            }
        }
    }

    /// `μ̂(x)`.
    pub fn point_estimate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.estimate_into(x, &mut out)?;
        Ok(out)
    }

    pub fn estimate_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            PointEstimator::RestrictedBayesUniform(rb) => {
                if x.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: x.len() });
                }
                out[0] = rb.estimate(x[0])?;
                Ok(())
            }
            _ => {
                let p = x.len();
                if let PointEstimator::LinearShrink { offset, .. } = self {
                    if !offset.is_empty() && offset.len() != p {
                        return Err(Error::DimensionMismatch { expected: offset.len(), got: p });
                    }
                }
                self.shrink_into(x, out);
                Ok(())
            }
        }
    }

    /// Closed-form rules; restricted Bayes is handled separately.
    fn shrink_into(&self, x: &[f64], out: &mut [f64]) {
        let p = x.len() as f64;
        let t: f64 = x.iter().map(|v| v * v).sum();
        let factor = match self {
            PointEstimator::Identity => 1.0,
            PointEstimator::LinearShrink { a, offset } => {
                for (k, (o, xi)) in out.iter_mut().zip(x).enumerate() {
                    *o = a * xi + offset.get(k).copied().unwrap_or(0.0);
                }
                return;
            }
            PointEstimator::Baranchik { a, r } => 1.0 - a * r.ratio(t),
            PointEstimator::JamesStein { sigma2 } => 1.0 - (p - 2.0) * sigma2 / t,
            PointEstimator::PositivePartJs { sigma2 } => (1.0 - (p - 2.0) * sigma2 / t).max(0.0),
            PointEstimator::RestrictedBayesUniform(_) => unreachable!("restricted Bayes is not a shrinkage rule"),
        };
        if t == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        for (o, xi) in out.iter_mut().zip(x) {
            *o = factor * xi;
        }
    }

    /// A fast evaluator for repeated use; restricted Bayes rules are tabulated.
    pub fn compile(&self) -> Result<CompiledEstimator> {
        self.validate()?;
        Ok(match self {
            PointEstimator::RestrictedBayesUniform(rb) => CompiledEstimator::Tabulated(cached_table(rb)?),
            other => CompiledEstimator::Direct(other.clone()),
        })
    }
}

/// Recently tabulated rules, so that scans over many parameter points pay
/// for the table once.
static TABLES: Mutex<Vec<Arc<RestrictedBayesTable>>> = Mutex::new(Vec::new());
const TABLE_CACHE_LEN: usize = 8;

fn cached_table(rb: &RestrictedBayes) -> Result<Arc<RestrictedBayesTable>> {
    if let Some(t) = TABLES.lock().expect("table cache poisoned").iter().find(|t| t.rule == *rb) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(rb.tabulate()?);
    let mut cache = TABLES.lock().expect("table cache poisoned");
    if cache.len() == TABLE_CACHE_LEN {
        cache.remove(0);
    }
    cache.push(Arc::clone(&table));
    Ok(table)
}

/// An estimator prepared for Monte Carlo use.
#[derive(Debug, Clone)]
pub enum CompiledEstimator {
    Direct(PointEstimator),
    Tabulated(Arc<RestrictedBayesTable>),
}

impl CompiledEstimator {
    pub fn estimate_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            CompiledEstimator::Direct(e) => e.estimate_into(x, out),
            CompiledEstimator::Tabulated(t) => {
                out[0] = t.estimate(x[0])?;
                Ok(())
            }
        }
    }
}

/// Uniform prior on `[lo, hi]` (either end may be infinite), normal
/// likelihood with variance `sigma2`, and a bowl-shaped dual loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictedBayes {
    #[serde(with = "crate::serde_ext::extended_real")]
    pub lo: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub hi: f64,
    pub loss: LossSpec,
    pub sigma2: f64,
}

/// Posterior mass beyond this many likelihood standard deviations is ignored.
const WINDOW_SDS: f64 = 40.0;
/// Beyond this distance from both ends the truncation has no effect in double precision.
const FREE_SDS: f64 = 12.0;
const TABLE_STEP_SDS: f64 = 0.002;

impl RestrictedBayes {
    pub fn new(lo: f64, hi: f64, loss: LossSpec, sigma2: f64) -> Result<Self> {
        let rb = Self { lo, hi, loss, sigma2 };
        rb.validate()?;
        Ok(rb)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_nan() || self.hi.is_nan() || self.lo >= self.hi {
            return Err(invalid(format!("restriction interval [{}, {}] is empty", self.lo, self.hi)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid(format!("likelihood variance must be positive, got {}", self.sigma2)));
        }
        match &self.loss {
            LossSpec::ReflectedNormal { .. } => self.loss.validate(),
            LossSpec::L1Dual { density } if density.dim() == 1 => Ok(()),
            other => Err(Error::Unsupported(format!(
                "restricted Bayes rules need a one-dimensional reflected normal or L1 dual loss, got {}",
                other.id()
            ))),
        }
    }

    fn sd(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Loss and its derivative in the signed error `δ = d − μ`.
    fn loss_and_slope(&self, delta: f64) -> (f64, f64) {
        match &self.loss {
            LossSpec::ReflectedNormal { gamma } => {
                let e = (-delta * delta / (2.0 * gamma)).exp();
                (1.0 - e, delta / gamma * e)
            }
            LossSpec::L1Dual { density } => {
                let a = delta.abs() / 2.0;
                (2.0 * density.marginal_cdf(a) - 1.0, delta.signum() * density.marginal_pdf(a))
            }
            _ => unreachable!("validated loss"),
        }
    }

    /// Posterior panels: `(breakpoints, log-weight shift)` covering the
    /// truncated posterior of `μ` given `x`.
    fn panels(&self, x: f64, split: f64) -> Vec<f64> {
        let sd = self.sd();
        let mode = x.clamp(self.lo, self.hi);
        let a = self.lo.max(mode.min(x) - WINDOW_SDS * sd).max(mode - WINDOW_SDS * sd);
        let b = self.hi.min(mode.max(x) + WINDOW_SDS * sd).min(mode + WINDOW_SDS * sd);
        // the log posterior is -(x-μ)²/2σ² + (x-mode)²/2σ²; skip panels below e^-46
        let keep = |m: f64| ((x - mode).powi(2) - (x - m).powi(2)) / (2.0 * self.sigma2) > -46.0;
        let width = 0.5 * sd;
        let mut breaks = Vec::new();
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        for k in 0..=n {
            breaks.push(a + (b - a) * k as f64 / n as f64);
        }
        if split > a && split < b {
            breaks.push(split);
            breaks.sort_by(f64::total_cmp);
        }
        let mut lo_i = 0;
        while lo_i + 1 < breaks.len() && !keep(breaks[lo_i + 1]) {
            lo_i += 1;
        }
        let mut hi_i = breaks.len() - 1;
        while hi_i > lo_i + 1 && !keep(breaks[hi_i - 1]) {
            hi_i -= 1;
        }
        breaks[lo_i..=hi_i].to_vec()
    }

    fn weight(&self, x: f64, mu: f64) -> f64 {
        let mode = x.clamp(self.lo, self.hi);
        (((x - mode).powi(2) - (x - mu).powi(2)) / (2.0 * self.sigma2)).exp()
    }

    /// Unnormalised posterior expected loss of the action `d`.
    pub fn posterior_loss(&self, x: f64, d: f64) -> f64 {
        let breaks = self.panels(x, d);
        kronrod_panels(|mu| self.weight(x, mu) * self.loss_and_slope(d - mu).0, &breaks)
    }

    fn posterior_slope(&self, x: f64, d: f64) -> f64 {
        let breaks = self.panels(x, d);
        kronrod_panels(|mu| self.weight(x, mu) * self.loss_and_slope(d - mu).1, &breaks)
    }

    /// The Bayes action at `x`, in `[lo, hi]`.
    pub fn estimate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(invalid(format!("observation must be finite, got {x}")));
        }
        let sd = self.sd();
        if x - self.lo >= FREE_SDS * sd && self.hi - x >= FREE_SDS * sd {
            return Ok(x);
        }
        let breaks = self.panels(x, f64::NAN);
        let (a, b) = (breaks[0], *breaks.last().expect("nonempty panels"));
        let mass = kronrod_panels(|mu| self.weight(x, mu), &breaks);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Numerical(format!("posterior at x={x} is not integrable")));
        }
        let d = golden_section_min(|d| self.posterior_loss(x, d), a, b, 1e-8 * sd);
        Ok(self.polish(x, d, a, b).clamp(self.lo, self.hi))
    }

    /// Refines a golden-section minimiser by bisection on the sign of the
    /// posterior-loss derivative.
    fn polish(&self, x: f64, d: f64, a: f64, b: f64) -> f64 {
        let eps = 1e-7 * self.sd();
        let (mut lo, mut hi) = ((d - eps).max(a), (d + eps).min(b));
        let (slo, shi) = (self.posterior_slope(x, lo), self.posterior_slope(x, hi));
        if !(slo < 0.0 && shi > 0.0) {
            return d;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.posterior_slope(x, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Range of `x` over which the rule differs from the identity.
    fn active_range(&self) -> (f64, f64) {
        let sd = self.sd();
        let margin = 8.0 * sd;
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo - margin, self.hi + margin),
            (true, false) => (self.lo - margin, self.lo + 16.0 * sd),
            (false, true) => (self.hi - 16.0 * sd, self.hi + margin),
            (false, false) => (0.0, 0.0),
        }
    }

    /// Tabulates the rule on a grid of step `0.002σ` over its active range.
    pub fn tabulate(&self) -> Result<RestrictedBayesTable> {
        let (a, b) = self.active_range();
        let h = TABLE_STEP_SDS * self.sd();
        let n = ((b - a) / h).ceil() as usize + 1;
        let values = if b > a {
            (0..n).into_par_iter().map(|k| self.estimate(a + k as f64 * h)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(RestrictedBayesTable { rule: self.clone(), start: a, step: h, values })
    }
}

/// A restricted Bayes rule tabulated for cubic interpolation; falls back to
/// the exact rule outside the table.
#[derive(Debug, Clone)]
pub struct RestrictedBayesTable {
    rule: RestrictedBayes,
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl RestrictedBayesTable {
    pub fn estimate(&self, x: f64) -> Result<f64> {
        let n = self.values.len();
        let s = (x - self.start) / self.step;
        if n < 4 || !(s >= 1.0 && s < (n - 2) as f64) {
            return self.rule.estimate(x);
        }
        let k = s.floor() as usize;
        let t = s - k as f64;
        let (y0, y1, y2, y3) = (self.values[k - 1], self.values[k], self.values[k + 1], self.values[k + 2]);
        // cubic Lagrange through nodes -1, 0, 1, 2
        let v = -t * (t - 1.0) * (t - 2.0) / 6.0 * y0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * y1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * y2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * y3;
        Ok(v.clamp(self.rule.lo, self.rule.hi))
    }

    pub fn rule(&self) -> &RestrictedBayes {
        &self.rule
    }
}

/// `restricted_bayes_point(x, [lo, hi], loss, σ_X²)`.
pub fn restricted_bayes_point(x: f64, lo: f64, hi: f64, loss: &LossSpec, sigma2: f64) -> Result<f64> {
    RestrictedBayes::new(lo, hi, loss.clone(), sigma2)?.estimate(x)
}

/// One-dimensional densities that are not scale mixtures of normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExplicitDensity {
    /// `(left + right)^{-1} (e^{u/left} 1{u<0} + e^{-u/right} 1{u>0})`.
    TwoSidedExponential { left: f64, right: f64 },
    /// Predictive density for `Uniform(μ, μ+1)` data with range `[x_min, x_max]`.
    Trapezoid { x_min: f64, x_max: f64 },
}

impl ExplicitDensity {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ExplicitDensity::TwoSidedExponential { left, right } => {
                let z = 1.0 / (left + right);
                if u < 0.0 {
                    z * (u / left).exp()
                } else if u > 0.0 {
                    z * (-u / right).exp()
                } else {
                    z
                }
            }
            ExplicitDensity::Trapezoid { x_min, x_max } => {
                let len = x_min - x_max + 1.0;
                if u <= x_max - 1.0 || u > x_min + 1.0 {
                    0.0
                } else if len == 0.0 || (u > x_min && u <= x_max) {
                    1.0
                } else if u <= x_min {
                    (u + 1.0 - x_max) / len
                } else {
                    (x_min + 1.0 - u) / len
                }
            }
        }
    }

    /// Support `[a, b]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ExplicitDensity::TwoSidedExponential { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ExplicitDensity::Trapezoid { x_min, x_max } => (x_max - 1.0, x_min + 1.0),
        }
    }
}

/// MRE predictive density for `n` observations from `Exp(μ, β1)` and a
/// future `Y ~ Exp(μ, β2)`, as a density in `u = y − min_i x_i`.
///
/// The posterior of `μ − min_i x_i` under a flat prior is exponential on the
/// negative axis with scale `β1/n`, so the left scale is `β1/n`.
pub fn exp_location_mre(n: usize, beta1: f64, beta2: f64) -> Result<ExplicitDensity> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    if !(beta1 > 0.0 && beta2 > 0.0 && beta1.is_finite() && beta2.is_finite()) {
        return Err(invalid("exponential scales must be positive"));
    }
    Ok(ExplicitDensity::TwoSidedExponential { left: beta1 / n as f64, right: beta2 })
}

/// MRE predictive density for `Uniform(μ, μ+1)` data with observed range
/// `[x_min, x_max]`.
pub fn uniform_mre(x_min: f64, x_max: f64) -> Result<ExplicitDensity> {
    let range = x_max - x_min;
    if !(0.0..=1.0).contains(&range) {
        return Err(invalid(format!("observed range {range} is impossible for Uniform(μ, μ+1) data")));
    }
    Ok(ExplicitDensity::Trapezoid { x_min, x_max })
}

/// The shape of a predictive density before location and scale are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Base {
    Smn { density: SmnDensity },
    Explicit { density: ExplicitDensity },
}

/// `q̂(y; x) = c^{-p} base((y − μ̂(x))/c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictiveDensity {
    pub base: Base,
    pub location: PointEstimator,
    pub scale: f64,
}

impl PredictiveDensity {
    pub fn new(base: Base, location: PointEstimator, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("scale must be positive, got {scale}")));
        }
        location.validate()?;
        Ok(Self { base, location, scale })
    }

    /// `c^{-p} q((y − μ̂(x))/c)`.
    pub fn plugin(q: &SmnDensity, location: PointEstimator, scale: f64) -> Result<Self> {
        Self::new(Base::Smn { density: q.clone() }, location, scale)
    }

    pub fn dim(&self) -> usize {
        match &self.base {
            Base::Smn { density } => density.dim(),
            Base::Explicit { .. } => 1,
        }
    }

    /// The effective SMN density `c T`, `T ~ base`, when the base is SMN.
    pub fn effective_smn(&self) -> Option<SmnDensity> {
        match &self.base {
            Base::Smn { density } => density.scaled(self.scale).ok(),
            Base::Explicit { .. } => None,
        }
    }

    pub fn id(&self) -> String {
        format!("{}|c={}", self.location.id(), self.scale)
    }
}

/// `q̂_mre(y; x) = (q ∗ p̄)(y − x)`.
pub fn mre_estimator(px: &SmnDensity, qy: &SmnDensity) -> Result<PredictiveDensity> {
    PredictiveDensity::new(Base::Smn { density: qy.convolve(px)? }, PointEstimator::Identity, 1.0)
}

/// Bayes predictive density for `X ~ N_p(μ, σ_X²I)`, `Y ~ N_p(μ, σ_Y²I)` and
/// the prior `μ ~ N_p(θ, τ²I)`: `N(μ̂(x), (σ_Y² + τ'²)I)` with the posterior
/// mean `μ̂` and posterior variance `τ'² = σ_X²τ²/(σ_X²+τ²)`.
pub fn normal_prior_bayes(sx2: f64, sy2: f64, theta: &[f64], tau2: f64) -> Result<PredictiveDensity> {
    if !(sx2 > 0.0 && sy2 > 0.0 && tau2 > 0.0) {
        return Err(invalid("variances must be positive"));
    }
    let shrink = tau2 / (sx2 + tau2);
    let offset: Vec<f64> = theta.iter().map(|t| sx2 * t / (sx2 + tau2)).collect();
    let post = sx2 * tau2 / (sx2 + tau2);
    let q = SmnDensity::normal(theta.len(), sy2)?;
    PredictiveDensity::plugin(&q, PointEstimator::LinearShrink { a: shrink, offset }, (1.0 + post / sy2).sqrt())
}

/// `q̂(y; x)`.
pub fn eval_predictive(d: &PredictiveDensity, y: &[f64], x: &[f64]) -> Result<f64> {
    if y.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: y.len() });
    }
    let loc = d.location.point_estimate(x)?;
    if loc.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: loc.len() });
    }
    let c = d.scale;
    let p = y.len() as f64;
    match &d.base {
        Base::Smn { density } => {
            let u: f64 = y.iter().zip(&loc).map(|(a, b)| ((a - b) / c).powi(2)).sum();
            Ok(c.powf(-p) * density.eval_radial(u))
        }
        Base::Explicit { density } => Ok(density.eval((y[0] - loc[0]) / c) / c),
    }
}
