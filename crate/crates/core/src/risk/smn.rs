//! L2 risk of the expanded plug-in `q_c(y − X)` when `X` and `Y` are scale
//! mixtures of normals, `X − μ ~ SMN(G)` and `Y − μ ~ SMN(H)`.
//!
//! With `V1 ~ G` and `W1, W2 ~ H` independent, the risk is constant in `μ`:
//!
//! ```text
//! R(c) = (2π)^{-p/2} [(1 + c^{-p}) N − 2 M_c]
//! N    = E (W1 + W2)^{-p/2}
//! M_c  = E (V1 + W1 + c² W2)^{-p/2}
//! ```

use super::ThresholdReport;
use crate::error::{invalid, Error, Result};
use crate::mixing::MixingLaw;
use crate::roots::expand_and_bisect;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;

/// Largest dimension tried by [`smn_universal_p0`].
pub const P0_PROBE_LIMIT: usize = 512;
const P0_MONOTONE_CHECKS: usize = 10;
/// Relative slack when comparing `N` with `2 M_1`, so that exact ties decided
/// by rounding still count as universal dominance.
const TIE_SLACK: f64 = 1e-12;

/// The inverse moments `N` and `M_c` that determine the risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmnMoments {
    pub n: f64,
    pub m_c: f64,
}

impl SmnMoments {
    pub fn compute(g: &MixingLaw, h: &MixingLaw, p: usize, c: f64) -> Result<Self> {
        check_args(g, h, p)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("scale must be positive, got {c}")));
        }
        let s = p as f64 / 2.0;
        let n = MixingLaw::sum(vec![h.clone(), h.clone()])?.inverse_moment(s)?;
        let m_c = MixingLaw::sum(vec![g.clone(), h.clone(), h.scaled(c * c)?])?.inverse_moment(s)?;
        Ok(Self { n, m_c })
    }
}

fn check_args(g: &MixingLaw, h: &MixingLaw, p: usize) -> Result<()> {
    if p == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    g.validate()?;
    h.validate()
}

fn inputs(g: &MixingLaw, h: &MixingLaw, p: usize) -> Vec<(&'static str, f64)> {
    vec![("p", p as f64), ("mean_g", g.mean()), ("mean_h", h.mean())]
}

/// `(2π)^{-p/2} [(1 + c^{-p}) N − 2 M_c]`.
pub fn smn_risk_qc(g: &MixingLaw, h: &MixingLaw, p: usize, c: f64) -> Result<f64> {
    let m = SmnMoments::compute(g, h, p, c)?;
    let pf = p as f64;
    Ok((2.0 * PI).powf(-pf / 2.0) * ((1.0 + c.powf(-pf)) * m.n - 2.0 * m.m_c))
}

/// Bisection on a fallible function: the first error raised by `f` aborts
/// the search and is returned.
fn fallible_root<F: Fn(f64) -> Result<f64>>(f: F) -> Result<crate::roots::Root<f64>> {
    let failure = RefCell::new(None);
    let root = expand_and_bisect(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        1.0 + 1e-9,
        2.0,
        200,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    root
}

/// `E[W2 (S + c² W2)^{-p/2-1}]`, `S = V1 + W1`.
fn weighted_moment(s_law: &MixingLaw, h: &MixingLaw, p: usize, c: f64) -> Result<f64> {
    let e = p as f64 / 2.0 + 1.0;
    let c2 = c * c;
    if let (Some(sa), Some(ha)) = (s_law.atoms(), h.atoms()) {
        let mut acc = 0.0;
        for &(s, ws) in &sa {
            for &(w, ww) in &ha {
                acc += ws * ww * w * (s + c2 * w).powf(-e);
            }
        }
        return Ok(acc);
    }
    s_law.weighted_shifted_inverse_moment(h, c2, e)
}

/// The risk-minimising expansion `c* > 1`, solving
/// `2 c^{p+2} E[W2 (V1 + W1 + c² W2)^{-p/2-1}] = N`.
pub fn smn_cstar(g: &MixingLaw, h: &MixingLaw, p: usize) -> Result<ThresholdReport> {
    let m1 = SmnMoments::compute(g, h, p, 1.0)?;
    let s_law = MixingLaw::sum(vec![g.clone(), h.clone()])?;
    let pf = p as f64;
    let root = fallible_root(|c| Ok(2.0 * c.powf(pf + 2.0) * weighted_moment(&s_law, h, p, c)? / m1.n - 1.0))?;
    let mut rep = ThresholdReport::new("smn_optimal_expansion", &inputs(g, h, p)).with_root(&root);
    rep.residual *= m1.n;
    Ok(rep)
}

/// `c1`: the expansion `q_c` dominates `q_1` exactly for `1 < c ≤ c1`;
/// infinite when `N ≥ 2 M_1`.
pub fn smn_c1(g: &MixingLaw, h: &MixingLaw, p: usize) -> Result<ThresholdReport> {
    let m1 = SmnMoments::compute(g, h, p, 1.0)?;
    let rep = ThresholdReport::new("smn_expansion_cutoff", &inputs(g, h, p));
    if m1.n >= 2.0 * m1.m_c * (1.0 - TIE_SLACK) {
        return Ok(rep.with_note(format!("infinite (N = {:e} ≥ 2 M_1 = {:e})", m1.n, 2.0 * m1.m_c)));
    }
    let pf = p as f64;
    let root = fallible_root(|c| {
        let mc = SmnMoments::compute(g, h, p, c)?.m_c;
        Ok((m1.n * (1.0 - c.powf(-pf)) - 2.0 * (m1.m_c - mc)) / m1.n)
    })?;
    let mut rep = rep.with_root(&root);
    rep.residual *= m1.n;
    Ok(rep)
}

/// The smallest dimension `p` with `N ≥ 2 M_1`, from which on every
/// expansion `c > 1` dominates the plug-in.
///
/// The condition is re-checked on the following dimensions; when an inverse
/// moment diverges before the condition holds, the search stops with
/// [`Error::ProbeExhausted`].
pub fn smn_universal_p0(g: &MixingLaw, h: &MixingLaw) -> Result<usize> {
    let holds = |p: usize| -> Result<bool> {
        let m = SmnMoments::compute(g, h, p, 1.0)?;
        Ok(m.n >= 2.0 * m.m_c * (1.0 - TIE_SLACK))
    };
    for p in 1..=P0_PROBE_LIMIT {
        match holds(p) {
            Ok(true) => {
                for q in p + 1..=p + P0_MONOTONE_CHECKS {
                    match holds(q) {
                        Ok(true) => {}
                        Ok(false) => {
                            return Err(Error::Numerical(format!(
                                "condition holds at p = {p} but fails again at p = {q}"
                            )))
                        }
                        Err(Error::Divergent(_)) => break,
                        Err(e) => return Err(e),
                    }
                }
                return Ok(p);
            }
            Ok(false) => {}
            Err(Error::Divergent(_)) => return Err(Error::ProbeExhausted(p - 1)),
            Err(e) => return Err(e),
        }
    }
    Err(Error::ProbeExhausted(P0_PROBE_LIMIT))
}
