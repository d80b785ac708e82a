//! Run configuration, loaded from JSON and validated before use.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{AsymptoticsConfig, EpsGrid};
use crate::functionals::{Context, CORPUS_VERSION};
use crate::genfun::GenFunConfig;
use crate::mollifier::MollifierParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: usize,
    pub panel_budget: usize,
    /// Relative agreement required between successive bisections.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let g = GenFunConfig::default();
        QuadratureConfig { order: g.quad_order, panel_budget: g.panel_budget, tol: g.quad_tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub sup_points: usize,
    pub sup_points_2d: usize,
    pub refine_top: usize,
    pub global_radius: f64,
    pub max_order: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let g = GenFunConfig::default();
        SamplingConfig {
            sup_points: g.sup_points,
            sup_points_2d: g.sup_points_2d,
            refine_top: g.refine_top,
            global_radius: g.global_radius,
            max_order: g.max_order,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub eps_grid: EpsGrid,
    pub asymptotics: AsymptoticsConfig,
    pub quadrature: QuadratureConfig,
    pub sampling: SamplingConfig,
    pub mollifier: MollifierParams,
    pub corpus_version: String,
    pub output: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            eps_grid: EpsGrid::default(),
            asymptotics: AsymptoticsConfig::default(),
            quadrature: QuadratureConfig::default(),
            sampling: SamplingConfig::default(),
            mollifier: MollifierParams::default(),
            corpus_version: CORPUS_VERSION.into(),
            output: None,
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        let c: Config = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Config::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.eps_grid.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let a = &self.asymptotics;
        if !(a.q_max > 0.0 && a.q_max.is_finite()) {
            return invalid("q_max must be positive");
        }
        if !(a.residual_tol > 0.0 && a.residual_tol.is_finite()) {
            return invalid("residual_tol must be positive");
        }
        if !(a.n_max > 0.0 && a.n_max.is_finite()) {
            return invalid("n_max must be positive");
        }
        let q = &self.quadrature;
        if !(2..=64).contains(&q.order) {
            return invalid("quadrature order must lie in 2..=64");
        }
        if q.panel_budget < 16 {
            return invalid("panel budget must be at least 16");
        }
        if !(q.tol > 0.0 && q.tol < 1e-2) {
            return invalid("quadrature tol must lie in (0, 1e-2)");
        }
        let s = &self.sampling;
        if s.sup_points < 16 || s.sup_points_2d < 16 {
            return invalid("sup sampling needs at least 16 points per axis");
        }
        if !(s.global_radius > 0.0 && s.global_radius.is_finite()) {
            return invalid("global radius must be positive");
        }
        if s.max_order > 12 {
            return invalid("max_order must not exceed 12");
        }
        self.mollifier.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.corpus_version != CORPUS_VERSION {
            return invalid(format!("unknown corpus version {:?}; this build has {CORPUS_VERSION}", self.corpus_version));
        }
        Ok(())
    }

    pub fn genfun(&self) -> GenFunConfig {
        GenFunConfig {
            sup_points: self.sampling.sup_points,
            sup_points_2d: self.sampling.sup_points_2d,
            refine_top: self.sampling.refine_top,
            max_order: self.sampling.max_order,
            global_radius: self.sampling.global_radius,
            quad_order: self.quadrature.order,
            quad_tol: self.quadrature.tol,
            panel_budget: self.quadrature.panel_budget,
        }
    }

    pub fn context(&self) -> Context {
        Context { grid: self.eps_grid.clone(), asym: self.asymptotics.clone(), genfun: self.genfun() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let c = Config::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), c);
        let partial = Config::from_json(r#"{"eps_grid": {"base": 2.0, "k_min": 6, "k_max": 30}}"#).unwrap();
        assert_eq!(partial.eps_grid.k_max, 30);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(Config::from_json(r#"{"asymptotics": {"q_max": -1, "residual_tol": 0.25, "n_max": 12}}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(Config::from_json(r#"{"corpus_version": "v0"}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(Config::from_json(r#"{"bogus": 1}"#), Err(ConfigError::Parse(_))));
        assert!(matches!(Config::from_json(r#"{"eps_grid": {"base": 2.0, "k_min": 6, "k_max": 7}}"#), Err(ConfigError::Invalid(_))));
    }
}
