//! Self-normalised importance sampling of the dual variance scale `Z`.
//!
//! Both dual laws reweight a product of mixing laws:
//!
//! ```text
//! l2:  Z = z1 z2 / (z1 + z2),    dτ ∝ z2^{-1} (z1 + z2)^{-p/2} dG(z1) dJ(z2),  J = G ∗ H ∗ H
//! l1:  Z = 4 z1 z2 / (z1 + 4z2), dτ ∝ z2^{(p-1)/2} (z1 + 4z2)^{-p/2} dG(z1) dH(z2)
//! ```
//!
//! Draws come from the product law and carry the density above as weight.
//! When both factors are finitely supported the expectations are
//! enumerated exactly.

use super::engine::run_chunks;
use crate::error::{invalid, Error, Result};
use crate::mixing::MixingLaw;
use serde::{Deserialize, Serialize};

/// Largest number of atom pairs enumerated exactly.
pub const MAX_EXACT_PAIRS: usize = 1 << 20;
/// Samples with effective size below this fraction of `n` are unreliable.
pub const MIN_ESS_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualVariant {
    L2,
    L1,
}

impl DualVariant {
    fn log_weight(self, p: usize, z1: f64, z2: f64) -> f64 {
        let h = p as f64 / 2.0;
        match self {
            DualVariant::L2 => -z2.ln() - h * (z1 + z2).ln(),
            DualVariant::L1 => (h - 0.5) * z2.ln() - h * (z1 + 4.0 * z2).ln(),
        }
    }

    fn z(self, z1: f64, z2: f64) -> f64 {
        match self {
            DualVariant::L2 => z1 * z2 / (z1 + z2),
            DualVariant::L1 => 4.0 * z1 * z2 / (z1 + 4.0 * z2),
        }
    }

    /// The law of the second coordinate under the proposal.
    fn second_law(self, g: &MixingLaw, h: &MixingLaw) -> Result<MixingLaw> {
        match self {
            DualVariant::L2 => MixingLaw::sum(vec![g.clone(), h.clone(), h.clone()]),
            DualVariant::L1 => Ok(h.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualMoment {
    pub k: f64,
    pub mean: f64,
    pub se: f64,
}

/// Weighted sums for the moments `E_τ Z^{k_i}`.
#[derive(Debug, Clone, Default, PartialEq)]
struct Sums {
    w: f64,
    w2: f64,
    wf: Vec<f64>,
    w2f: Vec<f64>,
    /// `Σ w² f_a f_b`, row-major.
    w2ff: Vec<f64>,
}

impl Sums {
    fn new(m: usize) -> Self {
        Self { w: 0.0, w2: 0.0, wf: vec![0.0; m], w2f: vec![0.0; m], w2ff: vec![0.0; m * m] }
    }

    fn push(&mut self, w: f64, f: &[f64]) {
        let m = f.len();
        self.w += w;
        self.w2 += w * w;
        for a in 0..m {
            self.wf[a] += w * f[a];
            self.w2f[a] += w * w * f[a];
            for b in 0..m {
                self.w2ff[a * m + b] += w * w * f[a] * f[b];
            }
        }
    }

    fn merge(&mut self, o: &Sums) {
        self.w += o.w;
        self.w2 += o.w2;
        for (a, b) in self.wf.iter_mut().zip(&o.wf) {
            *a += b;
        }
        for (a, b) in self.w2f.iter_mut().zip(&o.w2f) {
            *a += b;
        }
        for (a, b) in self.w2ff.iter_mut().zip(&o.w2ff) {
            *a += b;
        }
    }
}

/// Weighted sample summary of `Z` under the dual law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSample {
    pub variant: DualVariant,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    /// `(Σw)² / Σw²`; equals `n` for exact enumeration.
    pub ess: f64,
    pub exact: bool,
    pub reliable: bool,
    pub moments: Vec<DualMoment>,
    #[serde(skip)]
    sums: Sums,
}

impl DualSample {
    fn index(&self, k: f64) -> Result<usize> {
        self.moments
            .iter()
            .position(|m| m.k == k)
            .ok_or_else(|| invalid(format!("moment of order {k} was not requested")))
    }

    pub fn moment(&self, k: f64) -> Result<DualMoment> {
        Ok(self.moments[self.index(k)?])
    }

    /// `E Z^{ka} / E Z^{kb}` with its delta-method standard error.
    pub fn ratio(&self, ka: f64, kb: f64) -> Result<(f64, f64)> {
        let (a, b) = (self.index(ka)?, self.index(kb)?);
        let s = &self.sums;
        let m = self.moments.len();
        let r = s.wf[a] / s.wf[b];
        if self.exact {
            return Ok((r, 0.0));
        }
        let var = (s.w2ff[a * m + a] - 2.0 * r * s.w2ff[a * m + b] + r * r * s.w2ff[b * m + b]) / (s.wf[b] * s.wf[b]);
        Ok((r, var.max(0.0).sqrt()))
    }

    /// Turns an unreliable sample into [`Error::Unreliable`].
    pub fn require_reliable(self) -> Result<Self> {
        if self.reliable {
            Ok(self)
        } else {
            Err(Error::Unreliable { ess: self.ess, n: self.n })
        }
    }
}

/// Summaries of `E_τ Z^k` for each `k` in `ks` from `n` weighted draws.
pub fn importance_sample_dual(
    g: &MixingLaw,
    h: &MixingLaw,
    p: usize,
    variant: DualVariant,
    ks: &[f64],
    n: usize,
    seed: u64,
) -> Result<DualSample> {
    g.validate()?;
    h.validate()?;
    if p == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if ks.is_empty() || ks.iter().any(|k| !k.is_finite()) {
        return Err(invalid("at least one finite moment order is required"));
    }
    if n < 2 {
        return Err(invalid("at least two draws are required"));
    }
    let j = variant.second_law(g, h)?;
    let m = ks.len();
    let fvals = |z: f64, out: &mut [f64]| {
        for (o, k) in out.iter_mut().zip(ks) {
            *o = z.powf(*k);
        }
    };

    if let (Some(ga), Some(ja)) = (g.atoms(), j.atoms()) {
        if ga.len() * ja.len() <= MAX_EXACT_PAIRS {
            let mut s = Sums::new(m);
            let mut f = vec![0.0; m];
            for &(z1, p1) in &ga {
                for &(z2, p2) in &ja {
                    fvals(variant.z(z1, z2), &mut f);
                    s.push(p1 * p2 * variant.log_weight(p, z1, z2).exp(), &f);
                }
            }
            let moments = ks.iter().enumerate().map(|(i, &k)| DualMoment { k, mean: s.wf[i] / s.w, se: 0.0 }).collect();
            return Ok(DualSample {
                variant,
                p,
                n,
                seed,
                ess: n as f64,
                exact: true,
                reliable: true,
                moments,
                sums: s,
            });
        }
    }

    let offset = variant.log_weight(p, g.mean(), j.mean());
    let parts = run_chunks(n, seed, |rng, len| {
        let mut s = Sums::new(m);
        let mut f = vec![0.0; m];
        for _ in 0..len {
            let z1 = g.sample(rng);
            let z2 = j.sample(rng);
            let w = (variant.log_weight(p, z1, z2) - offset).exp();
            if !w.is_finite() {
                return Err(Error::Numerical(format!("non-finite importance weight at ({z1}, {z2})")));
            }
            fvals(variant.z(z1, z2), &mut f);
            s.push(w, &f);
        }
        Ok(s)
    })?;
    let mut s = Sums::new(m);
    for part in &parts {
        s.merge(part);
    }
    let ess = s.w * s.w / s.w2;
    let moments = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mean = s.wf[i] / s.w;
            let var = (s.w2ff[i * m + i] - 2.0 * mean * s.w2f[i] + mean * mean * s.w2) / (s.w * s.w);
            DualMoment { k, mean, se: var.max(0.0).sqrt() }
        })
        .collect();
    Ok(DualSample {
        variant,
        p,
        n,
        seed,
        ess,
        exact: false,
        reliable: ess >= MIN_ESS_FRACTION * n as f64,
        moments,
        sums: s,
    })
}
