//! Mixing laws: distributions of the variance scale `V` in a scale mixture
//! of normals.

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_half_line, PositiveRule};
use crate::special::{gamma_fn, ln_gamma};
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist};
use serde::{Deserialize, Serialize};

/// Largest tensor-product rule materialised for a `Sum` law.
const MAX_MATERIALISED_NODES: usize = 1 << 16;
const MAX_ENUMERATED_ATOMS: usize = 4096;

/// Distribution of a positive variance scale.
///
/// `Sum` keeps its terms symbolically: expectations run nested quadrature over
/// the terms and sampling adds independent draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixingLawRepr", into = "MixingLawRepr")]
pub enum MixingLaw {
    PointMass(f64),
    Gamma { shape: f64, scale: f64 },
    InverseGamma { shape: f64, scale: f64 },
    FiniteDiscrete(Vec<(f64, f64)>),
    Sum(Vec<MixingLaw>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MixingLawRepr {
    Point { value: f64 },
    Gamma { shape: f64, scale: f64 },
    #[serde(rename = "invgamma")]
    InvGamma { shape: f64, scale: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
    Sum { terms: Vec<MixingLaw> },
}

impl TryFrom<MixingLawRepr> for MixingLaw {
    type Error = Error;

    fn try_from(r: MixingLawRepr) -> Result<Self> {
        let law = match r {
            MixingLawRepr::Point { value } => MixingLaw::PointMass(value),
            MixingLawRepr::Gamma { shape, scale } => MixingLaw::Gamma { shape, scale },
            MixingLawRepr::InvGamma { shape, scale } => MixingLaw::InverseGamma { shape, scale },
            MixingLawRepr::Discrete { atoms } => MixingLaw::FiniteDiscrete(atoms),
            MixingLawRepr::Sum { terms } => MixingLaw::Sum(terms),
        };
        law.validate()?;
        Ok(law)
    }
}

impl From<MixingLaw> for MixingLawRepr {
    fn from(m: MixingLaw) -> Self {
        match m {
            MixingLaw::PointMass(value) => MixingLawRepr::Point { value },
            MixingLaw::Gamma { shape, scale } => MixingLawRepr::Gamma { shape, scale },
            MixingLaw::InverseGamma { shape, scale } => MixingLawRepr::InvGamma { shape, scale },
            MixingLaw::FiniteDiscrete(atoms) => MixingLawRepr::Discrete { atoms },
            MixingLaw::Sum(terms) => MixingLawRepr::Sum { terms },
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Spread of a gamma-type log-density in log coordinates, widened for small
/// shapes whose polynomial tail decays slowly in `ln v`.
fn log_width(shape: f64) -> f64 {
    if shape < 0.5 {
        0.5 / shape
    } else {
        (1.0 / shape.sqrt()).min(1.0)
    }
}

impl MixingLaw {
    pub fn point(v: f64) -> Result<Self> {
        let m = MixingLaw::PointMass(v);
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        let m = MixingLaw::Gamma { shape, scale };
        m.validate()?;
        Ok(m)
    }

    pub fn inverse_gamma(shape: f64, scale: f64) -> Result<Self> {
        let m = MixingLaw::InverseGamma { shape, scale };
        m.validate()?;
        Ok(m)
    }

    /// Mixing law of the multivariate Student `T(ν, σ)`: `InverseGamma(ν/2, νσ²/2)`.
    pub fn student(nu: f64, sigma: f64) -> Result<Self> {
        positive("degrees of freedom", nu)?;
        positive("sigma", sigma)?;
        Self::inverse_gamma(nu / 2.0, nu * sigma * sigma / 2.0)
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = MixingLaw::FiniteDiscrete(atoms);
        m.validate()?;
        Ok(m)
    }

    /// Law of the sum of independent draws, simplified where closed under
    /// addition (point masses, equal-scale gammas, `InverseGamma(1/2, ·)`
    /// stable laws, small discrete laws).
    pub fn sum(terms: Vec<MixingLaw>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("sum of zero mixing laws"));
        }
        for t in &terms {
            t.validate()?;
        }
        let mut flat = Vec::new();
        for t in terms {
            match t {
                MixingLaw::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let mut shift = 0.0;
        let mut gammas: Vec<(f64, f64)> = Vec::new();
        let mut levy: Option<f64> = None;
        let mut discrete: Option<Vec<(f64, f64)>> = None;
        let mut rest = Vec::new();
        for t in flat {
            match t {
                MixingLaw::PointMass(v) => shift += v,
                MixingLaw::Gamma { shape, scale } => {
                    if let Some(g) = gammas.iter_mut().find(|g| g.1 == scale) {
                        g.0 += shape;
                    } else {
                        gammas.push((shape, scale));
                    }
                }
                MixingLaw::InverseGamma { shape: 0.5, scale } => {
                    let root = scale.sqrt() + levy.map_or(0.0, f64::sqrt);
                    levy = Some(root * root);
                }
                MixingLaw::FiniteDiscrete(atoms) => {
                    discrete = Some(match discrete {
                        None => atoms,
                        Some(prev) if prev.len() * atoms.len() <= MAX_ENUMERATED_ATOMS => {
                            let mut out = Vec::with_capacity(prev.len() * atoms.len());
                            for &(a, wa) in &prev {
                                for &(b, wb) in &atoms {
                                    out.push((a + b, wa * wb));
                                }
                            }
                            out
                        }
                        Some(prev) => {
                            rest.push(MixingLaw::FiniteDiscrete(atoms));
                            prev
                        }
                    });
                }
                other => rest.push(other),
            }
        }
        let mut out: Vec<MixingLaw> = Vec::new();
        if let Some(mut atoms) = discrete {
            for a in atoms.iter_mut() {
                a.0 += shift;
            }
            shift = 0.0;
            out.push(MixingLaw::FiniteDiscrete(atoms));
        }
        out.extend(gammas.into_iter().map(|(shape, scale)| MixingLaw::Gamma { shape, scale }));
        if let Some(scale) = levy {
            out.push(MixingLaw::InverseGamma { shape: 0.5, scale });
        }
        out.extend(rest);
        if shift > 0.0 {
            out.insert(0, MixingLaw::PointMass(shift));
        }
        Ok(if out.len() == 1 { out.pop().expect("one term") } else { MixingLaw::Sum(out) })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MixingLaw::PointMass(v) => positive("point mass", *v),
            MixingLaw::Gamma { shape, scale } | MixingLaw::InverseGamma { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)
            }
            MixingLaw::FiniteDiscrete(atoms) => {
                if atoms.is_empty() {
                    return Err(invalid("discrete law needs at least one atom"));
                }
                let mut total = 0.0;
                for &(v, w) in atoms {
                    positive("atom", v)?;
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(invalid(format!("atom weight must be nonnegative, got {w}")));
                    }
                    total += w;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("discrete weights sum to {total}, expected 1")));
                }
                Ok(())
            }
            MixingLaw::Sum(terms) => {
                if terms.is_empty() {
                    return Err(invalid("sum of zero mixing laws"));
                }
                terms.iter().try_for_each(MixingLaw::validate)
            }
        }
    }

    /// Lower end of the support (0 when unbounded below within the positives).
    pub fn support_lower(&self) -> f64 {
        match self {
            MixingLaw::PointMass(v) => *v,
            MixingLaw::Gamma { .. } | MixingLaw::InverseGamma { .. } => 0.0,
            MixingLaw::FiniteDiscrete(atoms) => {
                atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0).fold(f64::INFINITY, f64::min)
            }
            MixingLaw::Sum(terms) => terms.iter().map(MixingLaw::support_lower).sum(),
        }
    }

    /// Upper end of the support.
    pub fn support_upper(&self) -> f64 {
        match self {
            MixingLaw::PointMass(v) => *v,
            MixingLaw::Gamma { .. } | MixingLaw::InverseGamma { .. } => f64::INFINITY,
            MixingLaw::FiniteDiscrete(atoms) => {
                atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0).fold(0.0, f64::max)
            }
            MixingLaw::Sum(terms) => terms.iter().map(MixingLaw::support_upper).sum(),
        }
    }

    /// Exponent `e` with `P(V ≤ ε) ≍ ε^e` as `ε → 0`; `None` when the law
    /// has no polynomial mass at the origin, so every inverse moment exists.
    pub fn zero_exponent(&self) -> Option<f64> {
        match self {
            MixingLaw::PointMass(_) | MixingLaw::FiniteDiscrete(_) | MixingLaw::InverseGamma { .. } => None,
            MixingLaw::Gamma { shape, .. } => Some(*shape),
            MixingLaw::Sum(terms) => {
                let mut e = 0.0;
                for t in terms {
                    e += t.zero_exponent()?;
                }
                Some(e)
            }
        }
    }

    /// Checks that `E[V^{-s}]` is finite.
    pub fn check_inverse_moment(&self, s: f64) -> Result<()> {
        match self.zero_exponent() {
            Some(e) if e <= s => Err(Error::Divergent(format!(
                "E[V^-{s}] diverges: mass near zero behaves like v^{e}"
            ))),
            _ => Ok(()),
        }
    }

    /// `E[T^{-k/2}]`.
    pub fn inverse_half_moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(invalid("inverse half moment order must be positive"));
        }
        self.inverse_moment(k as f64 / 2.0)
    }

    /// `E[V^{-s}]` for real `s > 0`.
    pub fn inverse_moment(&self, s: f64) -> Result<f64> {
        self.check_inverse_moment(s)?;
        Ok(match self {
            MixingLaw::PointMass(v) => v.powf(-s),
            MixingLaw::FiniteDiscrete(atoms) => atoms.iter().map(|&(v, w)| w * v.powf(-s)).sum(),
            MixingLaw::Gamma { shape, scale } => (ln_gamma(shape - s) - ln_gamma(*shape)).exp() * scale.powf(-s),
            MixingLaw::InverseGamma { shape, scale } => (ln_gamma(shape + s) - ln_gamma(*shape)).exp() * scale.powf(-s),
            MixingLaw::Sum(_) => self.shifted_inverse_moment(0.0, s)?,
        })
    }

    /// `E[(V + y)^{-s}]` for `y ≥ 0`, via the Laplace representation
    /// `(v + y)^{-s} = Γ(s)^{-1} ∫ x^{s-1} e^{-x(v+y)} dx`.
    pub fn shifted_inverse_moment(&self, y: f64, s: f64) -> Result<f64> {
        if y < 0.0 || !y.is_finite() {
            return Err(invalid(format!("shift must be nonnegative, got {y}")));
        }
        if y == 0.0 {
            self.check_inverse_moment(s)?;
            if !matches!(self, MixingLaw::Sum(_)) {
                return self.inverse_moment(s);
            }
        }
        if let MixingLaw::PointMass(v) = self {
            return Ok((v + y).powf(-s));
        }
        if let MixingLaw::FiniteDiscrete(atoms) = self {
            return Ok(atoms.iter().map(|&(v, w)| w * (v + y).powf(-s)).sum());
        }
        let scale = 1.0 / (self.typical_scale() + y);
        let integral = integrate_half_line(
            |x| {
                let l = (-x * y).exp() * self.laplace(x);
                if l == 0.0 { 0.0 } else { x.powf(s - 1.0) * l }
            },
            scale,
            1e-13,
        )?;
        Ok(integral / gamma_fn(s))
    }

    /// `E[W (V + c W)^{-s}]` where `self` is the law of `V` and `w_law` the law of `W`.
    pub fn weighted_shifted_inverse_moment(&self, w_law: &MixingLaw, c: f64, s: f64) -> Result<f64> {
        let scale = 1.0 / (self.typical_scale() + c * w_law.typical_scale());
        let integral = integrate_half_line(
            |x| {
                let l = self.laplace(x) * w_law.laplace_weighted(c * x);
                if l == 0.0 { 0.0 } else { x.powf(s - 1.0) * l }
            },
            scale,
            1e-13,
        )?;
        Ok(integral / gamma_fn(s))
    }

    /// Laplace transform `E[e^{-xV}]`.
    pub fn laplace(&self, x: f64) -> f64 {
        match self {
            MixingLaw::PointMass(v) => (-x * v).exp(),
            MixingLaw::FiniteDiscrete(atoms) => atoms.iter().map(|&(v, w)| w * (-x * v).exp()).sum(),
            MixingLaw::Gamma { shape, scale } => (1.0 + scale * x).powf(-shape),
            MixingLaw::InverseGamma { .. } => self.base_rule().expect(|v| (-x * v).exp()),
            MixingLaw::Sum(terms) => terms.iter().map(|t| t.laplace(x)).product(),
        }
    }

    /// `E[V e^{-xV}]`, minus the derivative of the Laplace transform.
    pub fn laplace_weighted(&self, x: f64) -> f64 {
        match self {
            MixingLaw::PointMass(v) => v * (-x * v).exp(),
            MixingLaw::FiniteDiscrete(atoms) => atoms.iter().map(|&(v, w)| w * v * (-x * v).exp()).sum(),
            MixingLaw::Gamma { shape, scale } => shape * scale * (1.0 + scale * x).powf(-shape - 1.0),
            MixingLaw::InverseGamma { .. } => self.base_rule().expect(|v| v * (-x * v).exp()),
            MixingLaw::Sum(terms) => {
                let lap: Vec<f64> = terms.iter().map(|t| t.laplace(x)).collect();
                (0..terms.len())
                    .map(|i| {
                        let others: f64 = lap.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l).product();
                        terms[i].laplace_weighted(x) * others
                    })
                    .sum()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            MixingLaw::PointMass(v) => *v,
            MixingLaw::FiniteDiscrete(atoms) => atoms.iter().map(|&(v, w)| v * w).sum(),
            MixingLaw::Gamma { shape, scale } => shape * scale,
            MixingLaw::InverseGamma { shape, scale } => {
                if *shape > 1.0 {
                    scale / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            MixingLaw::Sum(terms) => terms.iter().map(MixingLaw::mean).sum(),
        }
    }

    /// A finite representative scale (mode-like) used to centre quadratures.
    pub fn typical_scale(&self) -> f64 {
        match self {
            MixingLaw::PointMass(v) => *v,
            MixingLaw::FiniteDiscrete(_) => self.mean(),
            MixingLaw::Gamma { shape, scale } => shape * scale,
            MixingLaw::InverseGamma { shape, scale } => scale / shape,
            MixingLaw::Sum(terms) => terms.iter().map(MixingLaw::typical_scale).sum(),
        }
    }

    /// Law of `k V`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        positive("scale factor", k)?;
        Ok(match self {
            MixingLaw::PointMass(v) => MixingLaw::PointMass(v * k),
            MixingLaw::Gamma { shape, scale } => MixingLaw::Gamma { shape: *shape, scale: scale * k },
            MixingLaw::InverseGamma { shape, scale } => MixingLaw::InverseGamma { shape: *shape, scale: scale * k },
            MixingLaw::FiniteDiscrete(atoms) => MixingLaw::FiniteDiscrete(atoms.iter().map(|&(v, w)| (v * k, w)).collect()),
            MixingLaw::Sum(terms) => MixingLaw::Sum(terms.iter().map(|t| t.scaled(k)).collect::<Result<_>>()?),
        })
    }

    /// Law tilted by `v^{-s}`, together with the normaliser `E[V^{-s}]`.
    /// `None` for `Sum` laws, which have no closed tilted form.
    pub fn tilted(&self, s: f64) -> Result<Option<(f64, MixingLaw)>> {
        let norm = match self {
            MixingLaw::Sum(_) => return Ok(None),
            _ => self.inverse_moment(s)?,
        };
        let law = match self {
            MixingLaw::PointMass(v) => MixingLaw::PointMass(*v),
            MixingLaw::Gamma { shape, scale } => MixingLaw::Gamma { shape: shape - s, scale: *scale },
            MixingLaw::InverseGamma { shape, scale } => MixingLaw::InverseGamma { shape: shape + s, scale: *scale },
            MixingLaw::FiniteDiscrete(atoms) => {
                MixingLaw::FiniteDiscrete(atoms.iter().map(|&(v, w)| (v, w * v.powf(-s) / norm)).collect())
            }
            MixingLaw::Sum(_) => unreachable!(),
        };
        Ok(Some((norm, law)))
    }

    /// Quadrature rule of a single (non-`Sum`) law.
    fn base_rule(&self) -> PositiveRule {
        match self {
            MixingLaw::PointMass(v) => PositiveRule::point(*v),
            MixingLaw::FiniteDiscrete(atoms) => PositiveRule {
                nodes: atoms.iter().map(|a| a.0).collect(),
                weights: atoms.iter().map(|a| a.1).collect(),
            },
            MixingLaw::Gamma { shape, scale } => {
                let (a, l) = (*shape, *scale);
                let ln_norm = ln_gamma(a) + a * l.ln();
                PositiveRule::from_log_density(move |v| (a - 1.0) * v.ln() - v / l - ln_norm, a * l, log_width(a))
            }
            MixingLaw::InverseGamma { shape, scale } => {
                let (a, b) = (*shape, *scale);
                let ln_norm = a * b.ln() - ln_gamma(a);
                PositiveRule::from_log_density(move |v| ln_norm - (a + 1.0) * v.ln() - b / v, b / a, log_width(a))
            }
            MixingLaw::Sum(_) => self.rule().expect("sum rule requested through rule()"),
        }
    }

    /// Materialised quadrature rule, or `None` for `Sum` laws whose tensor
    /// product would exceed 2^16 nodes.
    pub fn rule(&self) -> Option<PositiveRule> {
        match self {
            MixingLaw::Sum(terms) => {
                let rules: Vec<PositiveRule> = terms.iter().map(MixingLaw::base_rule_nested).collect::<Option<_>>()?;
                let size: usize = rules.iter().map(PositiveRule::len).product();
                if size > MAX_MATERIALISED_NODES {
                    return None;
                }
                let mut acc = PositiveRule::point(0.0);
                for r in &rules {
                    acc = acc.convolve(r);
                }
                Some(acc)
            }
            _ => Some(self.base_rule()),
        }
    }

    fn base_rule_nested(&self) -> Option<PositiveRule> {
        match self {
            MixingLaw::Sum(_) => self.rule(),
            _ => Some(self.base_rule()),
        }
    }

    /// `E[f(V)]` by quadrature; `Sum` laws nest the component rules without
    /// materialising large tensor products.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match self {
            MixingLaw::Sum(terms) => {
                if let Some(rule) = self.rule() {
                    return rule.expect(&f);
                }
                let rules: Vec<PositiveRule> = terms.iter().map(|t| t.rule().expect("non-sum rule")).collect();
                nested_expect(&rules, 0.0, &f)
            }
            _ => self.base_rule().expect(f),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MixingLaw::PointMass(v) => *v,
            MixingLaw::Gamma { shape, scale } => {
                GammaDist::new(*shape, *scale).expect("validated gamma").sample(rng)
            }
            MixingLaw::InverseGamma { shape, scale } => {
                1.0 / GammaDist::new(*shape, 1.0 / *scale).expect("validated inverse gamma").sample(rng)
            }
            MixingLaw::FiniteDiscrete(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms.iter().rev().find(|a| a.1 > 0.0).map(|a| a.0).expect("nonempty")
            }
            MixingLaw::Sum(terms) => terms.iter().map(|t| t.sample(rng)).sum(),
        }
    }

    /// Whether the law is concentrated on finitely many atoms.
    pub fn is_finitely_supported(&self) -> bool {
        match self {
            MixingLaw::PointMass(_) | MixingLaw::FiniteDiscrete(_) => true,
            MixingLaw::Gamma { .. } | MixingLaw::InverseGamma { .. } => false,
            MixingLaw::Sum(terms) => terms.iter().all(MixingLaw::is_finitely_supported),
        }
    }

    /// Atoms of a finitely supported law (enumerating sums).
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            MixingLaw::PointMass(v) => Some(vec![(*v, 1.0)]),
            MixingLaw::FiniteDiscrete(a) => Some(a.clone()),
            MixingLaw::Gamma { .. } | MixingLaw::InverseGamma { .. } => None,
            MixingLaw::Sum(terms) => {
                let mut acc = vec![(0.0, 1.0)];
                for t in terms {
                    let a = t.atoms()?;
                    let mut next = Vec::with_capacity(acc.len() * a.len());
                    for &(x, wx) in &acc {
                        for &(y, wy) in &a {
                            next.push((x + y, wx * wy));
                        }
                    }
                    acc = next;
                }
                Some(acc)
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, MixingLaw::PointMass(_))
    }
}

fn nested_expect<F: Fn(f64) -> f64>(rules: &[PositiveRule], shift: f64, f: &F) -> f64 {
    match rules.split_first() {
        None => f(shift),
        Some((head, tail)) => head
            .nodes
            .iter()
            .zip(&head.weights)
            .map(|(&v, &w)| w * nested_expect(tail, shift + v, f))
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_forms_round_trip() {
        let s = r#"{"kind":"sum","terms":[{"kind":"gamma","shape":3.0,"scale":1.0},{"kind":"point","value":1.0},
                   {"kind":"invgamma","shape":2.5,"scale":2.5},{"kind":"discrete","atoms":[[1.0,0.5],[4.0,0.5]]}]}"#;
        let law: MixingLaw = serde_json::from_str(s).unwrap();
        let back: MixingLaw = serde_json::from_str(&serde_json::to_string(&law).unwrap()).unwrap();
        assert_eq!(law, back);
    }

    #[test]
    fn json_rejects_invalid_laws() {
        assert!(serde_json::from_str::<MixingLaw>(r#"{"kind":"gamma","shape":-1,"scale":1}"#).is_err());
        assert!(serde_json::from_str::<MixingLaw>(r#"{"kind":"discrete","atoms":[[1,0.5],[2,0.4]]}"#).is_err());
        assert!(serde_json::from_str::<MixingLaw>(r#"{"kind":"point","value":1,"extra":2}"#).is_err());
    }

    #[test]
    fn sum_simplifies_closed_families() {
        let pp = MixingLaw::sum(vec![MixingLaw::point(1.0).unwrap(), MixingLaw::point(2.0).unwrap()]).unwrap();
        assert_eq!(pp, MixingLaw::PointMass(3.0));
        let gg = MixingLaw::sum(vec![MixingLaw::gamma(3.0, 1.0).unwrap(), MixingLaw::gamma(2.0, 1.0).unwrap()]).unwrap();
        assert_eq!(gg, MixingLaw::Gamma { shape: 5.0, scale: 1.0 });
        let cc = MixingLaw::sum(vec![MixingLaw::student(1.0, 1.0).unwrap(), MixingLaw::student(1.0, 2.0).unwrap()]).unwrap();
        match cc {
            MixingLaw::InverseGamma { shape, scale } => {
                assert_eq!(shape, 0.5);
                assert_relative_eq!(scale, 4.5, max_relative = 1e-15);
            }
            other => panic!("expected a Cauchy mixing law, got {other:?}"),
        }
        let mixed = MixingLaw::sum(vec![MixingLaw::gamma(3.0, 1.0).unwrap(), MixingLaw::gamma(2.0, 2.0).unwrap()]).unwrap();
        assert!(matches!(mixed, MixingLaw::Sum(ref t) if t.len() == 2));
    }

    #[test]
    fn inverse_moment_examples() {
        assert_relative_eq!(MixingLaw::point(2.0).unwrap().inverse_half_moment(2).unwrap(), 0.5);
        assert_relative_eq!(MixingLaw::gamma(3.0, 1.0).unwrap().inverse_half_moment(2).unwrap(), 0.5, max_relative = 1e-12);
        let ones = MixingLaw::Sum(vec![MixingLaw::PointMass(1.0), MixingLaw::PointMass(1.0)]);
        assert_relative_eq!(ones.inverse_half_moment(4).unwrap(), 0.25, max_relative = 1e-10);
    }

    #[test]
    fn inverse_moment_divergence_is_reported() {
        let g = MixingLaw::gamma(1.0, 1.0).unwrap();
        assert!(matches!(g.inverse_half_moment(2), Err(Error::Divergent(_))));
        assert!(g.inverse_half_moment(1).is_ok());
        let s = MixingLaw::Sum(vec![MixingLaw::gamma(0.6, 1.0).unwrap(), MixingLaw::gamma(0.6, 2.0).unwrap()]);
        assert!(s.inverse_half_moment(2).is_ok());
        assert!(matches!(s.inverse_half_moment(3), Err(Error::Divergent(_))));
        let with_point = MixingLaw::Sum(vec![MixingLaw::gamma(0.2, 1.0).unwrap(), MixingLaw::PointMass(0.5)]);
        assert!(with_point.inverse_half_moment(10).is_ok());
    }

    #[test]
    fn unsimplified_sum_matches_closed_gamma() {
        // Gamma(2,1)+Gamma(3,1) kept symbolic must agree with Gamma(5,1).
        let raw = MixingLaw::Sum(vec![MixingLaw::gamma(2.0, 1.0).unwrap(), MixingLaw::gamma(3.0, 1.0).unwrap()]);
        let closed = MixingLaw::gamma(5.0, 1.0).unwrap();
        for k in 1..=6 {
            let a = raw.inverse_half_moment(k).unwrap();
            let b = closed.inverse_half_moment(k).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
        assert_relative_eq!(raw.expect(|v| (-v).exp()), closed.laplace(1.0), max_relative = 1e-10);
    }

    #[test]
    fn gamma_inverse_moment_against_monte_carlo() {
        let g = MixingLaw::gamma(3.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 400_000;
        let draws: Vec<f64> = (0..n).map(|_| 1.0 / g.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn inverse_gamma_rule_matches_closed_moments() {
        let ig = MixingLaw::inverse_gamma(2.5, 2.5).unwrap();
        let rule = ig.rule().unwrap();
        assert_relative_eq!(rule.expect(|v| v), ig.mean(), max_relative = 1e-10);
        assert_relative_eq!(rule.expect(|v| v.powf(-1.5)), ig.inverse_moment(1.5).unwrap(), max_relative = 1e-10);
        // heavy-tailed Lévy case: Laplace transform e^{-2 sqrt(βx)}
        let levy = MixingLaw::inverse_gamma(0.5, 0.5).unwrap();
        assert_relative_eq!(levy.laplace(2.0), (-2.0 * (0.5f64 * 2.0).sqrt()).exp(), max_relative = 1e-9);
    }

    #[test]
    fn sum_inverse_moment_against_monte_carlo() {
        let s = MixingLaw::Sum(vec![MixingLaw::gamma(1.2, 1.0).unwrap(), MixingLaw::gamma(1.5, 2.0).unwrap()]);
        let exact = s.inverse_half_moment(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let draws: Vec<f64> = (0..n).map(|_| 1.0 / s.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - exact).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {exact}");
    }

    #[test]
    fn weighted_shifted_moment_degenerate() {
        let v = MixingLaw::point(2.0).unwrap();
        let w = MixingLaw::point(1.0).unwrap();
        let got = v.weighted_shifted_inverse_moment(&w, 3.0, 2.5).unwrap();
        assert_relative_eq!(got, 1.0 * (2.0f64 + 3.0).powf(-2.5), max_relative = 1e-10);
    }

    #[test]
    fn adding_a_variable_never_increases_inverse_moments() {
        let a = MixingLaw::gamma(4.0, 0.5).unwrap();
        let b = MixingLaw::inverse_gamma(3.0, 1.0).unwrap();
        let s = MixingLaw::Sum(vec![a.clone(), b]);
        for k in 1..=6 {
            assert!(s.inverse_half_moment(k).unwrap() <= a.inverse_half_moment(k).unwrap());
        }
    }
}
