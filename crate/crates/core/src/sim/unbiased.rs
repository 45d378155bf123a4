//! Monte Carlo check of the identity `E_X N(X, c²σ_Y² I)(y) = N(μ, (σ_X² + c²σ_Y²) I)(y)`.

use super::dominance::SE_MULTIPLIER;
use super::engine::{run_chunks, Stats};
use crate::error::{invalid, Error, Result};
use crate::risk::NormalModel;
use crate::special::normal_density_iso;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessPoint {
    pub y: Vec<f64>,
    pub mc_mean: f64,
    pub se: f64,
    /// `N(μ, (σ_X² + c²σ_Y²) I)(y)`.
    pub expected: f64,
    /// The density of `Y`, `N(μ, σ_Y² I)(y)`.
    pub target: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessReport {
    pub c2: f64,
    pub mu: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub points: Vec<UnbiasednessPoint>,
    /// Every point within three standard errors of `expected`.
    pub pass: bool,
    /// `expected` coincides with `target`, i.e. `c² = 1 − r`.
    pub unbiased_for_target: bool,
}

/// Averages `N(X, c²σ_Y² I)(y)` over `n` draws of `X ~ N(μ, σ_X² I)` at each `y`.
pub fn unbiasedness_check(
    m: &NormalModel<f64>,
    c2: f64,
    mu: &[f64],
    ys: &[Vec<f64>],
    n: usize,
    seed: u64,
) -> Result<UnbiasednessReport> {
    if !(c2 > 0.0 && c2.is_finite()) {
        return Err(invalid(format!("c² must be positive, got {c2}")));
    }
    if n < 2 {
        return Err(invalid("at least two replicates are needed"));
    }
    let p = m.p;
    for y in std::iter::once(mu).chain(ys.iter().map(|y| y.as_slice())) {
        if y.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: y.len() });
        }
    }
    let v = c2 * m.sy2;
    let sx = m.sx2.sqrt();
    let parts = run_chunks(n, seed, |rng, len| {
        let mut stats = vec![Stats::default(); ys.len()];
        let mut x = vec![0.0; p];
        for _ in 0..len {
            for (xi, mi) in x.iter_mut().zip(mu) {
                let z: f64 = StandardNormal.sample(rng);
                *xi = mi + sx * z;
            }
            for (s, y) in stats.iter_mut().zip(ys) {
                let d2: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                s.push(normal_density_iso(d2, v, p));
            }
        }
        Ok(stats)
    })?;
    let mut points = Vec::with_capacity(ys.len());
    for (k, y) in ys.iter().enumerate() {
        let s = Stats::merged(parts.iter().map(|c| &c[k]));
        let d2: f64 = y.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
        let expected = normal_density_iso(d2, m.sx2 + v, p);
        points.push(UnbiasednessPoint {
            y: y.clone(),
            mc_mean: s.mean,
            se: s.se(),
            expected,
            target: normal_density_iso(d2, m.sy2, p),
            pass: (s.mean - expected).abs() <= SE_MULTIPLIER * s.se(),
        });
    }
    Ok(UnbiasednessReport {
        c2,
        mu: mu.to_vec(),
        n,
        seed,
        pass: points.iter().all(|p| p.pass),
        unbiased_for_target: ((m.sx2 + v) / m.sy2 - 1.0).abs() < 1e-12,
        points,
    })
}
