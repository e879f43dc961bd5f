//! Run configuration shared by every CLI command.
//!
//! ```toml
//! out = "out"
//! rotation_cycles_per_eval = 1
//! velocity_cycles = 20
//! race_cycles = 100
//!
//! [sim]
//! seed = 7
//! wear_rate = 0.0
//!
//! [eval]
//! step_delay = 0.1
//! cycles_per_eval = 3
//!
//! [search]
//! leg_order = ["A", "B", "C", "D"]
//! n_prims = 7
//! rounds = 1
//!
//! [control]
//! check_every = 4
//! tolerance = { x = 0.05, y = 0.05, theta = 0.05 }
//!
//! [reward."+x"]            # replaces the preset for +x
//! a = 1.0
//! b = 0.0
//! c = 0.0
//! d = 0.0
//! e = -1.0
//! f = -1.0
//!
//! [[drift_injection]]      # latent bias added to a gait set gait, per cycle
//! axis = "+x"
//! bias = { x = 0.0, y = 0.0, theta = 0.02 }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControllerConfig;
use crate::gait::{LegId, NUM_PRIMITIVES};
use crate::reward::{preset, GaitAxis, RewardCoefficients};
use crate::search::{SearchOptions, SearchSpace};
use crate::sim::{EvaluationConfig, SimConfig, Twist};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn default_legs() -> Vec<LegId> {
    LegId::ALL.to_vec()
}
fn default_prims() -> usize {
    NUM_PRIMITIVES
}
fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_legs")]
    pub leg_order: Vec<LegId>,
    #[serde(default = "default_prims")]
    pub n_prims: usize,
    /// 1 is a plain tree search; each extra round refines the result.
    #[serde(default = "one")]
    pub rounds: u32,
    #[serde(default = "one")]
    pub repeats: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { leg_order: default_legs(), n_prims: default_prims(), rounds: 1, repeats: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftInjection {
    pub axis: GaitAxis,
    pub bias: Twist,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_velocity_cycles() -> u32 {
    20
}
fn default_race_cycles() -> u32 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Cycles per evaluation when training the ±θ gaits; `eval` covers the rest.
    #[serde(default = "one")]
    pub rotation_cycles_per_eval: u32,
    /// Cycles used to measure each gait's mean velocity.
    #[serde(default = "default_velocity_cycles")]
    pub velocity_cycles: u32,
    #[serde(default = "default_race_cycles")]
    pub race_cycles: u32,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub eval: EvaluationConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub control: ControllerConfig,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reward: BTreeMap<GaitAxis, RewardCoefficients>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drift_injection: Vec<DriftInjection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.sim.validate().map_err(|e| invalid(&e))?;
        self.eval.validate().map_err(|e| invalid(&e))?;
        self.control.validate().map_err(|e| invalid(&e))?;
        self.search_options().map_err(|e| invalid(&e))?;
        if self.rotation_cycles_per_eval == 0 {
            return Err(ConfigError::Invalid("rotation_cycles_per_eval must be >= 1".into()));
        }
        if self.velocity_cycles < 2 {
            return Err(ConfigError::Invalid("velocity_cycles must be >= 2".into()));
        }
        if self.search.rounds == 0 {
            return Err(ConfigError::Invalid("search.rounds must be >= 1".into()));
        }
        for (axis, k) in &self.reward {
            if !k.is_finite() {
                return Err(ConfigError::Invalid(format!("reward coefficients for {axis} must be finite")));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self, axis: GaitAxis) -> RewardCoefficients {
        self.reward.get(&axis).copied().unwrap_or_else(|| preset(axis))
    }

    pub fn search_options(&self) -> Result<SearchOptions, crate::search::SearchError> {
        let space = SearchSpace::new(self.search.leg_order.clone(), self.search.n_prims)?;
        Ok(SearchOptions { space, repeats: self.search.repeats.max(1) })
    }

    /// Evaluation timing used to train `axis`.
    pub fn eval_for(&self, axis: GaitAxis) -> EvaluationConfig {
        if axis.is_rotation() {
            EvaluationConfig { cycles_per_eval: self.rotation_cycles_per_eval, ..self.eval }
        } else {
            self.eval
        }
    }
}
