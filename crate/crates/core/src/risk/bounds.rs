//! Baranchik multiplier caps under which shrinkage of the plug-in (L1) or
//! of the MRE density (L2) is certified to dominate.

use crate::error::{invalid, Error, Result};
use crate::metrics::Spherical;
use crate::mixing::MixingLaw;
use crate::quad::integrate_half_line;
use crate::sim::dual::{importance_sample_dual, DualVariant};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A cap on the Baranchik multiplier, with Monte Carlo error when sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundReport {
    pub equation_id: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
    pub se: f64,
    /// Dual-law moments the cap is built from, keyed by name.
    pub moments: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ess: Option<f64>,
    pub exact: bool,
}

fn inputs(g: &MixingLaw, h: &MixingLaw, p: usize, n: usize, seed: u64) -> BTreeMap<String, f64> {
    [("p", p as f64), ("mean_g", g.mean()), ("mean_h", h.mean()), ("n", n as f64), ("seed", seed as f64)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// `E_τ(Z^{-1})` for `G = Gamma(α1, λ)`, `H = Gamma(α2, λ)`:
/// `(α1+α2−1)(2α1+2α2−3) / ((α1+α2−1−p/4)(α1−1)(α1+2α2−2) λ)`.
///
/// Both shapes must exceed `p/2`.
pub fn gamma_dual_inverse_mean(alpha1: f64, alpha2: f64, scale: f64, p: usize) -> Result<f64> {
    let half = p as f64 / 2.0;
    if !(alpha1 > half && alpha2 > half) {
        return Err(invalid(format!("both gamma shapes must exceed p/2 = {half}, got {alpha1} and {alpha2}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("gamma scale must be positive"));
    }
    let (a1, a2) = (alpha1, alpha2);
    let num = (a1 + a2 - 1.0) * (2.0 * a1 + 2.0 * a2 - 3.0);
    let den = (a1 + a2 - 1.0 - p as f64 / 4.0) * (a1 - 1.0) * (a1 + 2.0 * a2 - 2.0);
    Ok(num / den / scale)
}

/// `2(p−2) / E_τ(Z^{-1})` for the L2 dual law, `E_τ(Z^{-1}) = E_τ(1/Z1 + 1/Z2)`.
pub fn l2_dual_mixture_bound(g: &MixingLaw, h: &MixingLaw, p: usize, n: usize, seed: u64) -> Result<BoundReport> {
    if p < 3 {
        return Err(invalid(format!("shrinkage of the MRE density needs p ≥ 3, got {p}")));
    }
    let s = importance_sample_dual(g, h, p, DualVariant::L2, &[-1.0], n, seed)?.require_reliable()?;
    let inv = s.moment(-1.0)?;
    let cap = 2.0 * (p as f64 - 2.0) / inv.mean;
    Ok(BoundReport {
        equation_id: "l2_dual_baranchik_cap".into(),
        inputs: inputs(g, h, p, n, seed),
        value: cap,
        se: cap * inv.se / inv.mean,
        moments: [("inverse_mean".to_string(), inv.mean), ("inverse_mean_se".to_string(), inv.se)].into(),
        ess: (!s.exact).then_some(s.ess),
        exact: s.exact,
    })
}

/// `2(p−3) E_τ(Z^{-1/2}) / E_τ(Z^{-3/2})` for the L1 dual law.
pub fn l1_baranchik_bound(g: &MixingLaw, h: &MixingLaw, p: usize, n: usize, seed: u64) -> Result<BoundReport> {
    if p < 4 {
        return Err(invalid(format!("L1 shrinkage caps need p ≥ 4, got {p}")));
    }
    let s = importance_sample_dual(g, h, p, DualVariant::L1, &[0.5, -0.5, -1.5], n, seed)?.require_reliable()?;
    let (ratio, ratio_se) = s.ratio(-0.5, -1.5)?;
    let k = 2.0 * (p as f64 - 3.0);
    let mut moments = BTreeMap::new();
    for m in &s.moments {
        moments.insert(format!("moment_{}", m.k), m.mean);
        moments.insert(format!("moment_{}_se", m.k), m.se);
    }
    Ok(BoundReport {
        equation_id: "l1_dual_baranchik_cap".into(),
        inputs: inputs(g, h, p, n, seed),
        value: k * ratio,
        se: k * ratio_se,
        moments,
        ess: (!s.exact).then_some(s.ess),
        exact: s.exact,
    })
}

/// `(2(p−2)/p) ∫ u^{(p−3)/2} p_X(u) F′(√u/2) du / ∫ u^{(p−5)/2} p_X(u) F′(√u/2) du`,
/// with `p_X` the radial profile of `X − μ` and `F′` the marginal density of `Y − μ`.
pub fn l1_general_bound<P, Q>(px: &P, qy: &Q, p: usize) -> Result<f64>
where
    P: Spherical + ?Sized,
    Q: Spherical + ?Sized,
{
    if p < 4 {
        return Err(invalid(format!("L1 shrinkage caps need p ≥ 4, got {p}")));
    }
    if px.dim() != p || qy.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, got: if px.dim() != p { px.dim() } else { qy.dim() } });
    }
    let kernel = |u: f64| px.radial(u) * qy.pdf(u.sqrt() / 2.0);
    let pf = p as f64;
    // Centre the exp-sinh transform where the numerator integrand peaks.
    let scale = (-60..=60)
        .map(|i| 10f64.powf(i as f64 / 10.0))
        .max_by(|a, b| (a.powf((pf - 1.0) / 2.0) * kernel(*a)).total_cmp(&(b.powf((pf - 1.0) / 2.0) * kernel(*b))))
        .unwrap_or(1.0);
    let integral = |e: f64| {
        integrate_half_line(
            |u| {
                let k = kernel(u);
                if k == 0.0 {
                    0.0
                } else {
                    u.powf(e) * k
                }
            },
            scale,
            1e-12,
        )
    };
    let num = integral((pf - 3.0) / 2.0)?;
    let den = integral((pf - 5.0) / 2.0)?;
    if !(num.is_finite() && den.is_finite() && num > 0.0 && den > 0.0) {
        return Err(Error::Divergent("L1 cap integrals are not finite and positive".into()));
    }
    Ok(2.0 * (pf - 2.0) / pf * num / den)
}
