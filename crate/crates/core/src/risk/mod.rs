//! Frequentist risks, dominance cutoffs and shrinkage caps.
//!
//! [`normal`] holds the closed forms for the normal model and is generic
//! over [`Scalar`](crate::Scalar). [`smn`] extends the plug-in risk and its
//! cutoffs to scale mixtures of normals, and [`bounds`] computes the
//! Baranchik caps that certify shrinkage.
//!
//! Throughout, `dual_offset` and `dual_scale` denote the affine constants
//! linking a plug-in density's L2 risk to its reflected normal point risk,
//! and `shrink_a` the factor in `N(aX, c²σ_Y² I)`.

pub mod bounds;
pub mod normal;
pub mod smn;

pub use bounds::{
    gamma_dual_inverse_mean, l1_baranchik_bound, l1_general_bound, l2_dual_mixture_bound, BoundReport,
};
pub use normal::{
    baranchik_cap, cutoff_equation, l1_bound_normal, mre_plugin_risk_ratio, p0_threshold, p0a_threshold, psi_a,
    risk_mre_normal, risk_qc_ax_normal, risk_qc_normal, stein_transfer_variance, threshold_ka_root, unbiased_c2,
    L1NormalBound, NormalModel,
};
pub use smn::{smn_c1, smn_cstar, smn_risk_qc, smn_universal_p0, SmnMoments};

use crate::error::Result;
use crate::roots::Root;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A solved cutoff or root together with the evidence for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdReport {
    pub equation_id: String,
    pub inputs: BTreeMap<String, f64>,
    /// `+∞` when the cutoff is infinite.
    #[serde(with = "crate::serde_ext::extended_real")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::extended_real_pair")]
    pub bracket: (f64, f64),
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ThresholdReport {
    pub(crate) fn new(equation_id: &str, inputs: &[(&str, f64)]) -> Self {
        Self {
            equation_id: equation_id.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value: f64::INFINITY,
            bracket: (f64::INFINITY, f64::INFINITY),
            residual: 0.0,
            se: None,
            note: None,
        }
    }

    pub(crate) fn with_root(mut self, root: &Root<f64>) -> Self {
        self.value = root.value;
        self.bracket = (root.lo, root.hi);
        self.residual = root.residual;
        self
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `k(p, r)`: `N(X, c²σ_Y² I)` dominates `N(X, σ_Y² I)` exactly for `1 < c² ≤ k(p, r)`.
pub fn threshold_k(p: usize, r: f64) -> Result<ThresholdReport> {
    let mut rep = threshold_ka(p, r, 1.0)?;
    rep.equation_id = "plugin_expansion_cutoff".into();
    rep.inputs.remove("a");
    Ok(rep)
}

/// `k_a(p)`: `N(aX, c²σ_Y² I)` dominates `N(aX, σ_Y² I)` exactly for `1 < c² ≤ k_a(p)`.
pub fn threshold_ka(p: usize, r: f64, a: f64) -> Result<ThresholdReport> {
    let rep = ThresholdReport::new("shrunk_plugin_expansion_cutoff", &[("p", p as f64), ("r", r), ("a", a)]);
    let p0 = p0a_threshold(a, r)?;
    match threshold_ka_root(p, r, a)? {
        Some(root) => Ok(rep.with_root(&root).with_note(format!("p < p0 = {p0:.6}"))),
        None => Ok(rep.with_note(format!("infinite (p ≥ p0 = {p0:.3})"))),
    }
}

/// Dominance of `N(aX, c²σ_Y² I)` over `N(aX, σ_Y² I)` for every `μ`.
///
/// The risk difference changes sign at most once in `‖μ‖`, so the check
/// only needs `μ = 0`; the returned note records this reliance.
pub fn expansion_dominates(m: &NormalModel<f64>, a: f64, c2: f64) -> Result<(bool, String)> {
    let diff = risk_qc_ax_normal(m, a, c2, 0.0)? - risk_qc_ax_normal(m, a, 1.0, 0.0)?;
    let verdict = c2 > 1.0 && diff < 0.0;
    Ok((
        verdict,
        format!("risk difference at μ = 0 is {diff:e}; certified at μ = 0 only, using the single sign change of the difference in ‖μ‖"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn threshold_reports() {
        let k = threshold_k(2, 1.0).unwrap();
        assert_abs_diff_eq!(k.value, 6.0, epsilon = 1e-9);
        assert!(k.bracket.0 <= k.value && k.value <= k.bracket.1);
        assert!(k.residual.abs() <= 1e-9);
        assert_eq!(k.equation_id, "plugin_expansion_cutoff");
        let inf = threshold_k(4, 1.0).unwrap();
        assert!(inf.is_infinite());
        assert!(inf.note.as_deref().unwrap().contains("3.419"));
    }

    #[test]
    fn shrunk_threshold_matches_plain_at_a_one() {
        for p in 1..4 {
            for &r in &[0.3, 1.0, 1.7] {
                let k = threshold_k(p, r).unwrap();
                let ka = threshold_ka(p, r, 1.0).unwrap();
                if k.is_infinite() {
                    assert!(ka.is_infinite());
                } else {
                    assert_abs_diff_eq!(k.value, ka.value, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn report_json_round_trip() {
        let k = threshold_k(5, 1.0).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"value\":\"inf\""));
        let back: ThresholdReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        let k = threshold_k(1, 1.0).unwrap();
        let back: ThresholdReport = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn dominance_certificate() {
        let m = NormalModel::new(2, 1.0, 1.0).unwrap();
        assert!(expansion_dominates(&m, 1.0, 5.9).unwrap().0);
        assert!(!expansion_dominates(&m, 1.0, 6.1).unwrap().0);
        let (ok, note) = expansion_dominates(&m, 0.5, 1.5).unwrap();
        assert!(ok && note.contains("μ = 0"));
        assert!(!expansion_dominates(&m, 0.5, 1.7).unwrap().0);
    }
}
