//! Chunked, seeded Monte Carlo over the observation `X`.
//!
//! Draws are split into chunks of [`CHUNK`] replicates. Chunk `k` uses a
//! ChaCha8 generator seeded with the master seed on stream `k`, and chunk
//! summaries are merged in chunk order, so results are bit-identical for
//! any number of worker threads.

use crate::densities::SmnDensity;
use crate::error::{invalid, Error, Result};
use crate::estimators::{Base, CompiledEstimator, PredictiveDensity};
use crate::metrics::LossSpec;
use crate::quad::{integrate, integrate_half_line};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const CHUNK: usize = 1 << 16;

pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `f(rng, len)` on each chunk of `n` replicates in parallel and
/// returns the chunk results in chunk order.
pub(crate) fn run_chunks<A, F>(n: usize, seed: u64, f: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Result<A> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK.min(n - k * CHUNK);
            f(&mut chunk_rng(seed, k), len)
        })
        .collect()
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    m2: f64,
}

impl Stats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Stats) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Sample standard deviation over `√n`.
    pub fn se(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn merged<'a>(parts: impl IntoIterator<Item = &'a Stats>) -> Stats {
        let mut acc = Stats::default();
        for s in parts {
            acc.merge(s);
        }
        acc
    }
}

/// Observation and target densities: `X − μ ~ px`, `Y − μ ~ qy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub px: SmnDensity,
    pub qy: SmnDensity,
}

impl Model {
    pub fn new(px: SmnDensity, qy: SmnDensity) -> Result<Self> {
        px.check_dim(qy.dim())?;
        Ok(Self { px, qy })
    }

    pub fn normal(p: usize, sx2: f64, sy2: f64) -> Result<Self> {
        Self::new(SmnDensity::normal(p, sx2)?, SmnDensity::normal(p, sy2)?)
    }

    pub fn dim(&self) -> usize {
        self.px.dim()
    }
}

/// A Monte Carlo risk with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    pub seed: u64,
    pub mu: Vec<f64>,
    pub estimator_id: String,
    pub loss_id: String,
}

/// Risks of two estimators on common draws, and their paired difference
/// `risk1 − risk2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedEstimate {
    pub first: RiskEstimate,
    pub second: RiskEstimate,
    pub diff: f64,
    pub diff_se: f64,
}

/// Per-draw loss `x ↦ L(μ, q̂(·; x))`, prepared once per estimator.
pub(crate) struct LossKernel {
    location: CompiledEstimator,
    kind: KernelKind,
    mu: Vec<f64>,
}

#[allow(clippy::large_enum_variant)]
enum KernelKind {
    /// `qq + ff − 2 (q∗f)(‖μ̂−μ‖²)`.
    L2 { qq: f64, ff: f64, cross: SmnDensity },
    /// `4F(‖μ̂−μ‖/2) − 2`.
    L1Plugin { q: SmnDensity },
    /// One-dimensional quadrature of `|q(y−μ) − q̂(y)|`.
    L1Quadrature { q: SmnDensity, est: PredictiveDensity, width: f64 },
    /// Dual point loss as a function of `‖μ̂−μ‖²`.
    Point(PointKernel),
}

enum PointKernel {
    Reflected { gamma: f64 },
    Smn { j: SmnDensity, peak: f64 },
    L1Dual { f: SmnDensity },
}

impl PointKernel {
    fn new(loss: &LossSpec) -> Result<Self> {
        Ok(match loss {
            LossSpec::ReflectedNormal { gamma } => PointKernel::Reflected { gamma: *gamma },
            LossSpec::ReflectedSmn { mixing, dim } => {
                let j = SmnDensity::new(*dim, mixing.clone())?;
                let peak = j.peak();
                PointKernel::Smn { j, peak }
            }
            LossSpec::L1Dual { density } => PointKernel::L1Dual { f: density.clone() },
            _ => unreachable!("integrated losses are handled by the density kernels"),
        })
    }

    fn eval(&self, u: f64) -> f64 {
        match self {
            PointKernel::Reflected { gamma } => -(-u / (2.0 * gamma)).exp_m1(),
            PointKernel::Smn { j, peak } => (peak - j.eval_radial(u)).max(0.0),
            PointKernel::L1Dual { f } => (2.0 * f.marginal_cdf(u.sqrt() / 2.0) - 1.0).clamp(0.0, 1.0),
        }
    }
}

impl LossKernel {
    pub(crate) fn new(model: &Model, est: &PredictiveDensity, loss: &LossSpec, mu: &[f64]) -> Result<Self> {
        loss.validate()?;
        model.px.check_dim(mu.len())?;
        if est.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), got: est.dim() });
        }
        let q = &model.qy;
        let unsupported = || Error::Unsupported(format!("loss {} for estimator {}", loss.id(), est.id()));
        let kind = match loss {
            LossSpec::L2Integrated => {
                let f = est.effective_smn().ok_or_else(unsupported)?;
                KernelKind::L2 { qq: q.convolve(q)?.peak(), ff: f.convolve(&f)?.peak(), cross: q.convolve(&f)? }
            }
            LossSpec::L1Integrated => match est.effective_smn() {
                Some(f) if f == *q => KernelKind::L1Plugin { q: q.clone() },
                _ if model.dim() == 1 => {
                    let width = 40.0 * q.mixing().typical_scale().sqrt().max(match &est.base {
                        Base::Smn { density } => est.scale * density.mixing().typical_scale().sqrt(),
                        Base::Explicit { .. } => est.scale,
                    });
                    KernelKind::L1Quadrature { q: q.clone(), est: est.clone(), width }
                }
                _ => return Err(unsupported()),
            },
            LossSpec::ReflectedSmn { dim, .. } if *dim != model.dim() => {
                return Err(Error::DimensionMismatch { expected: model.dim(), got: *dim })
            }
            _ => KernelKind::Point(PointKernel::new(loss)?),
        };
        Ok(Self { location: est.location.compile()?, kind, mu: mu.to_vec() })
    }

    /// Loss at observation `x`; `buf` receives `μ̂(x)`.
    pub(crate) fn eval(&self, x: &[f64], buf: &mut [f64]) -> Result<f64> {
        self.location.estimate_into(x, buf)?;
        let u: f64 = buf.iter().zip(&self.mu).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(match &self.kind {
            KernelKind::L2 { qq, ff, cross } => (qq + ff - 2.0 * cross.eval_radial(u)).max(0.0),
            KernelKind::L1Plugin { q } => (4.0 * q.marginal_cdf(u.sqrt() / 2.0) - 2.0).clamp(0.0, 2.0),
            KernelKind::L1Quadrature { q, est, width } => l1_quadrature_1d(q, self.mu[0], est, buf[0], *width)?,
            KernelKind::Point(k) => k.eval(u),
        })
    }
}

/// `∫ |q(y − μ) − q̂(y)| dy` in one dimension, where `q̂` is centred at `loc`.
fn l1_quadrature_1d(q: &SmnDensity, mu: f64, est: &PredictiveDensity, loc: f64, width: f64) -> Result<f64> {
    let c = est.scale;
    let qhat = |y: f64| match &est.base {
        Base::Smn { density } => density.marginal_pdf((y - loc) / c) / c,
        Base::Explicit { density } => density.eval((y - loc) / c) / c,
    };
    let g = |y: f64| (q.marginal_pdf(y - mu) - qhat(y)).abs();
    let lo = mu.min(loc) - width;
    let hi = mu.max(loc) + width;
    let mut breaks = vec![lo, mu, loc, hi];
    if let Base::Explicit { density } = &est.base {
        let (a, b) = density.support();
        for e in [a, b] {
            if e.is_finite() {
                breaks.push(loc + c * e);
            }
        }
        if let crate::estimators::ExplicitDensity::Trapezoid { x_min, x_max } = density {
            breaks.push(loc + c * x_min);
            breaks.push(loc + c * x_max);
        }
    }
    breaks.retain(|b| (lo..=hi).contains(b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate(g, w[0], w[1], 1e-12, 1e-10)?;
    }
    let tail_scale = width / 40.0;
    total += integrate_half_line(|t| g(hi + t), tail_scale, 1e-8)?;
    total += integrate_half_line(|t| g(lo - t), tail_scale, 1e-8)?;
    Ok(total.clamp(0.0, 2.0))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(invalid("at least two replicates are needed for a standard error"))
    } else {
        Ok(())
    }
}

fn estimate(stats: &Stats, seed: u64, mu: &[f64], est: &PredictiveDensity, loss: &LossSpec) -> RiskEstimate {
    RiskEstimate {
        mean: stats.mean,
        se: stats.se(),
        n: stats.n,
        seed,
        mu: mu.to_vec(),
        estimator_id: est.id(),
        loss_id: loss.id(),
    }
}

/// Monte Carlo risk `E_μ L(μ, q̂(·; X))` from `n` draws of `X`; the
/// integral over `y` is done in closed form (or by quadrature).
pub fn mc_risk(
    model: &Model,
    est: &PredictiveDensity,
    loss: &LossSpec,
    mu: &[f64],
    n: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    check_n(n)?;
    let kernel = LossKernel::new(model, est, loss, mu)?;
    let p = model.dim();
    let parts = run_chunks(n, seed, |rng, len| {
        let (mut x, mut buf) = (vec![0.0; p], vec![0.0; p]);
        let mut s = Stats::default();
        for _ in 0..len {
            model.px.sample_into(mu, rng, &mut x);
            s.push(kernel.eval(&x, &mut buf)?);
        }
        Ok(s)
    })?;
    Ok(estimate(&Stats::merged(&parts), seed, mu, est, loss))
}

/// Risks of `first` and `second` on the same draws of `X`, with the SE of
/// the paired difference.
pub fn mc_risk_paired(
    model: &Model,
    first: &PredictiveDensity,
    second: &PredictiveDensity,
    loss: &LossSpec,
    mu: &[f64],
    n: usize,
    seed: u64,
) -> Result<PairedEstimate> {
    check_n(n)?;
    let k1 = LossKernel::new(model, first, loss, mu)?;
    let k2 = LossKernel::new(model, second, loss, mu)?;
    let p = model.dim();
    let parts = run_chunks(n, seed, |rng, len| {
        let (mut x, mut buf) = (vec![0.0; p], vec![0.0; p]);
        let mut s = [Stats::default(); 3];
        for _ in 0..len {
            model.px.sample_into(mu, rng, &mut x);
            let a = k1.eval(&x, &mut buf)?;
            let b = k2.eval(&x, &mut buf)?;
            s[0].push(a);
            s[1].push(b);
            s[2].push(a - b);
        }
        Ok(s)
    })?;
    let merge = |i: usize| Stats::merged(parts.iter().map(|s| &s[i]));
    let d = merge(2);
    Ok(PairedEstimate {
        first: estimate(&merge(0), seed, mu, first, loss),
        second: estimate(&merge(1), seed, mu, second, loss),
        diff: d.mean,
        diff_se: d.se(),
    })
}
