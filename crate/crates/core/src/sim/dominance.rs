//! Paired Monte Carlo comparison of two estimators over a grid of `μ`.

use super::engine::{mc_risk_paired, Model};
use crate::error::{invalid, Result};
use crate::estimators::PredictiveDensity;
use crate::metrics::LossSpec;
use serde::{Deserialize, Serialize};

/// Number of standard errors separating a difference from zero.
pub const SE_MULTIPLIER: f64 = 3.0;

/// The norms `‖μ‖` placed on the first axis by [`standard_mu_grid`].
pub const GRID_NORMS: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
/// Norm of the diagonal grid point.
pub const DIAGONAL_NORM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dominates,
    Dominated,
    Inconclusive,
}

/// Outcome at one `μ`: whether the first estimator is significantly better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Better,
    Worse,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominancePoint {
    pub mu: Vec<f64>,
    pub risk1: f64,
    pub se1: f64,
    pub risk2: f64,
    pub se2: f64,
    /// `risk1 − risk2`.
    pub diff: f64,
    pub diff_se: f64,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub estimator1: String,
    pub estimator2: String,
    pub loss: String,
    pub n: usize,
    pub seed: u64,
    pub points: Vec<DominancePoint>,
    pub verdict: Verdict,
}

/// `‖μ‖ ∈ {0, 0.5, 1, 2, 4, 8}` along the first axis, plus the point of
/// norm 2 on the main diagonal when `p ≥ 2`.
pub fn standard_mu_grid(p: usize) -> Vec<Vec<f64>> {
    let mut grid: Vec<Vec<f64>> = GRID_NORMS
        .iter()
        .map(|&r| {
            let mut mu = vec![0.0; p];
            mu[0] = r;
            mu
        })
        .collect();
    if p >= 2 {
        grid.push(vec![DIAGONAL_NORM / (p as f64).sqrt(); p]);
    }
    grid
}

/// Points `μ = t e_1` for the given `t`.
pub fn axis_grid(p: usize, norms: &[f64]) -> Vec<Vec<f64>> {
    norms
        .iter()
        .map(|&t| {
            let mut mu = vec![0.0; p];
            mu[0] = t;
            mu
        })
        .collect()
}

pub fn compare(diff: f64, se: f64) -> Comparison {
    if diff + SE_MULTIPLIER * se < 0.0 {
        Comparison::Better
    } else if diff - SE_MULTIPLIER * se > 0.0 {
        Comparison::Worse
    } else {
        Comparison::Tie
    }
}

/// "dominates" when no point is significantly worse and at least one is
/// significantly better; "dominated" symmetrically.
pub fn verdict(points: &[Comparison]) -> Verdict {
    let better = points.contains(&Comparison::Better);
    let worse = points.contains(&Comparison::Worse);
    match (better, worse) {
        (true, false) => Verdict::Dominates,
        (false, true) => Verdict::Dominated,
        _ => Verdict::Inconclusive,
    }
}

/// Seed for grid point `i`, so that points use distinct streams.
pub fn point_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Paired risk differences `R(μ, est1) − R(μ, est2)` on each grid point.
pub fn dominance_scan(
    est1: &PredictiveDensity,
    est2: &PredictiveDensity,
    loss: &LossSpec,
    model: &Model,
    grid: &[Vec<f64>],
    n: usize,
    seed: u64,
) -> Result<DominanceReport> {
    if grid.is_empty() {
        return Err(invalid("μ-grid must not be empty"));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (i, mu) in grid.iter().enumerate() {
        let pr = mc_risk_paired(model, est1, est2, loss, mu, n, point_seed(seed, i))?;
        points.push(DominancePoint {
            mu: mu.clone(),
            risk1: pr.first.mean,
            se1: pr.first.se,
            risk2: pr.second.mean,
            se2: pr.second.se,
            diff: pr.diff,
            diff_se: pr.diff_se,
            comparison: compare(pr.diff, pr.diff_se),
        });
    }
    let verdict = verdict(&points.iter().map(|p| p.comparison).collect::<Vec<_>>());
    Ok(DominanceReport {
        estimator1: est1.id(),
        estimator2: est2.id(),
        loss: loss.id(),
        n,
        seed,
        points,
        verdict,
    })
}
