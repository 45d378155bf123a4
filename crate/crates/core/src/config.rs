//! Experiment files: a JSON description of a model, a set of predictive
//! densities, a loss and a μ-grid, resolved into concrete objects.

use crate::densities::SmnDensity;
use crate::error::{Error, Result};
use crate::estimators::{mre_estimator, PointEstimator, PredictiveDensity};
use crate::metrics::LossSpec;
use crate::mixing::MixingLaw;
use crate::risk::{risk_mre_normal, risk_qc_normal, smn_risk_qc, NormalModel};
use crate::sim::{standard_mu_grid, Model};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_N: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `X ~ N_p(μ, σ_X² I)`, `Y ~ N_p(μ, σ_Y² I)`.
    Normal { p: usize, sx2: f64, sy2: f64 },
    /// Scale mixtures of normals with mixing laws `g` for `X` and `h` for `Y`.
    Smn { p: usize, g: MixingLaw, h: MixingLaw },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Normal { p, .. } | ModelSpec::Smn { p, .. } => *p,
        }
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            ModelSpec::Normal { p, sx2, sy2 } => Model::normal(*p, *sx2, *sy2),
            ModelSpec::Smn { p, g, h } => Model::new(SmnDensity::new(*p, g.clone())?, SmnDensity::new(*p, h.clone())?),
        }
    }

    fn laws(&self) -> Result<(MixingLaw, MixingLaw)> {
        match self {
            ModelSpec::Normal { sx2, sy2, .. } => Ok((MixingLaw::point(*sx2)?, MixingLaw::point(*sy2)?)),
            ModelSpec::Smn { g, h, .. } => Ok((g.clone(), h.clone())),
        }
    }
}

/// Shape of a predictive density in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    /// `c^{-p} q_Y((y − μ̂(x))/c)`.
    #[default]
    Plugin,
    /// The minimum risk equivariant density `q_Y ∗ p_X`, scaled by `c`.
    Mre,
}

fn default_c2() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub base: BaseKind,
    #[serde(default = "default_location")]
    pub location: PointEstimator,
    #[serde(default = "default_c2")]
    pub c2: f64,
}

fn default_location() -> PointEstimator {
    PointEstimator::Identity
}

impl EstimatorSpec {
    pub fn plugin(c2: f64) -> Self {
        Self { label: None, base: BaseKind::Plugin, location: PointEstimator::Identity, c2 }
    }

    pub fn build(&self, model: &Model) -> Result<PredictiveDensity> {
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::Config(format!("c2 must be positive, got {}", self.c2)));
        }
        let c = self.c2.sqrt();
        match self.base {
            BaseKind::Plugin => PredictiveDensity::plugin(&model.qy, self.location.clone(), c),
            BaseKind::Mre => {
                let mut est = mre_estimator(&model.px, &model.qy)?;
                est.location = self.location.clone();
                est.scale = c;
                est.location.validate()?;
                Ok(est)
            }
        }
    }

    pub fn display_label(&self, model: &Model) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => match self.build(model) {
                Ok(e) => match self.base {
                    BaseKind::Plugin => e.id(),
                    BaseKind::Mre => format!("mre:{}", e.id()),
                },
                Err(_) => "invalid".into(),
            },
        }
    }

    /// Closed-form risk when the location is `X` and the loss is L2.
    pub fn closed_form_risk(&self, spec: &ModelSpec, loss: &LossSpec) -> Result<Option<f64>> {
        if *loss != LossSpec::L2Integrated || self.location != PointEstimator::Identity {
            return Ok(None);
        }
        match (self.base, spec) {
            (BaseKind::Plugin, ModelSpec::Normal { p, sx2, sy2 }) => {
                Ok(Some(risk_qc_normal(&NormalModel::new(*p, *sx2, *sy2)?, self.c2)?))
            }
            (BaseKind::Plugin, ModelSpec::Smn { .. }) => {
                let (g, h) = spec.laws()?;
                Ok(Some(smn_risk_qc(&g, &h, spec.dim(), self.c2.sqrt())?))
            }
            (BaseKind::Mre, ModelSpec::Normal { p, sx2, sy2 }) if self.c2 == 1.0 => {
                Ok(Some(risk_mre_normal(&NormalModel::new(*p, *sx2, *sy2)?)))
            }
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// A seed drawn from the operating system's entropy source.
pub fn fresh_seed() -> u64 {
    rand::random()
}

fn default_loss() -> LossSpec {
    LossSpec::L2Integrated
}

fn default_n() -> usize {
    DEFAULT_N
}

/// An experiment file.
///
/// Omitted fields take defaults: L2 loss, the standard μ-grid, `n = 10⁵`
/// and JSON output. A missing seed is drawn from the operating system by
/// [`ExperimentConfig::resolve`] and written back so the resolved config
/// reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub scenario: String,
    pub model: ModelSpec,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_loss")]
    pub loss: LossSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_grid: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialise")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("at least one estimator is required".into()));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        let p = self.model.dim();
        if let Some(grid) = &self.mu_grid {
            if grid.is_empty() {
                return Err(Error::Config("mu_grid is empty".into()));
            }
            if let Some(bad) = grid.iter().find(|m| m.len() != p) {
                return Err(Error::Config(format!("mu_grid point {bad:?} does not have dimension {p}")));
            }
        }
        let model = self.model.build()?;
        for e in &self.estimators {
            e.build(&model)?;
        }
        self.loss.validate()
    }

    /// Fills every defaulted field, drawing a seed if none was given.
    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Self> {
        self.validate()?;
        if seed_override.is_some() {
            self.seed = seed_override;
        }
        if self.seed.is_none() {
            self.seed = Some(fresh_seed());
        }
        if self.mu_grid.is_none() {
            self.mu_grid = Some(standard_mu_grid(self.model.dim()));
        }
        Ok(self)
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn grid(&self) -> Vec<Vec<f64>> {
        self.mu_grid.clone().unwrap_or_else(|| standard_mu_grid(self.model.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "scenario": "expansion",
        "model": {"kind": "normal", "p": 2, "sx2": 1.0, "sy2": 1.0},
        "estimators": [{"c2": 1.0}, {"c2": 2.0}]
    }"#;

    #[test]
    fn defaults_are_filled_and_round_trip() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.n, DEFAULT_N);
        assert_eq!(cfg.loss, LossSpec::L2Integrated);
        assert_eq!(cfg.estimators[1].location, PointEstimator::Identity);
        let resolved = cfg.resolve(Some(7)).unwrap();
        assert_eq!(resolved.seed, Some(7));
        assert_eq!(resolved.mu_grid.as_ref().unwrap().len(), 7);
        let back = ExperimentConfig::from_json(&resolved.to_json()).unwrap();
        assert_eq!(back, resolved);
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let extra = MINIMAL.replace("\"version\": 1,", "\"version\": 1, \"colour\": \"red\",");
        assert!(matches!(ExperimentConfig::from_json(&extra), Err(Error::Config(_))));
        let v2 = MINIMAL.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(ExperimentConfig::from_json(&v2), Err(Error::Config(_))));
        let nested = MINIMAL.replace("{\"c2\": 1.0}", "{\"c2\": 1.0, \"shape\": 3}");
        assert!(ExperimentConfig::from_json(&nested).is_err());
    }

    #[test]
    fn missing_seed_is_generated_and_recorded() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap().resolve(None).unwrap();
        assert!(cfg.seed.is_some());
        assert!(cfg.to_json().contains("\"seed\""));
    }

    #[test]
    fn grid_dimension_is_checked() {
        let bad = MINIMAL.replace("\"estimators\"", "\"mu_grid\": [[0.0]], \"estimators\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn closed_form_risks_for_the_expansion_example() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for (c2, expect) in [(1.0, 1.0 / 3.0), (2.0, 0.25), (6.0, 1.0 / 3.0)] {
            let r = EstimatorSpec::plugin(c2).closed_form_risk(&cfg.model, &cfg.loss).unwrap().unwrap();
            assert!((r * two_pi - expect).abs() < 1e-12, "c2={c2}: {r}");
        }
    }

    #[test]
    fn smn_spec_builds_and_has_closed_form() {
        let spec = ModelSpec::Smn { p: 3, g: MixingLaw::gamma(3.0, 1.0).unwrap(), h: MixingLaw::point(1.0).unwrap() };
        assert_eq!(spec.build().unwrap().dim(), 3);
        let r = EstimatorSpec::plugin(1.0).closed_form_risk(&spec, &LossSpec::L2Integrated).unwrap();
        assert!(r.unwrap() > 0.0);
        assert_eq!(EstimatorSpec::plugin(1.0).closed_form_risk(&spec, &LossSpec::L1Integrated).unwrap(), None);
    }
}
