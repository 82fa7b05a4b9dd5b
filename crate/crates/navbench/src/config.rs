//! TOML configuration loading for the CLI.
//!
//! Precedence is built-in defaults < config file < command-line flags. A
//! config file only needs the keys it wants to change; unknown keys are
//! rejected. The `--config` argument accepts either a bundled preset name
//! (`sim-tuned`, `real-params`) or a path to a TOML file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::csf::ClothParams;
use crate::elevation::ElevationParams;
use crate::pipeline::{
    CameraConfig, MonoChain, PerceptionMode, PipelineConfig, Rates,
};
use crate::planning::{PlannerConfig, PlannerMode};
use crate::sim::{AnchorModel, DepthArtifacts, LidarSpec};

#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("unknown preset {0:?} (expected sim-tuned or real-params)")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// What `--config` resolved to.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigArg {
    Preset(PlannerMode),
    File(PathBuf),
}

/// Interpret a `--config` value: preset name first, file path otherwise.
pub fn parse_config_arg(s: &str) -> ConfigArg {
    match parse_preset(s) {
        Some(mode) => ConfigArg::Preset(mode),
        None => ConfigArg::File(PathBuf::from(s)),
    }
}

fn parse_preset(s: &str) -> Option<PlannerMode> {
    match s.replace('-', "_").as_str() {
        "sim_tuned" => Some(PlannerMode::SimTuned),
        "real_params" => Some(PlannerMode::RealParams),
        _ => None,
    }
}

/// Partial planner table. Setting `mode` rebases onto that preset; any other
/// key then overrides the preset value, so e.g. `{ mode = "sim_tuned",
/// iterations = 50 }` keeps the sim-tuned weights.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerOverride {
    pub mode: Option<PlannerMode>,
    pub robot_radius: Option<f64>,
    pub v_max: Option<f64>,
    pub v_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub a_max: Option<f64>,
    pub obstacle_clearance: Option<f64>,
    pub w_time: Option<f64>,
    pub w_obstacle: Option<f64>,
    pub w_viapoint: Option<f64>,
    pub w_kinematic: Option<f64>,
    pub w_velocity: Option<f64>,
    pub iterations: Option<usize>,
    pub step_size: Option<f64>,
}

impl PlannerOverride {
    fn apply(&self, planner: &mut PlannerConfig) {
        if let Some(mode) = self.mode {
            *planner = PlannerConfig::preset(mode);
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { planner.$field = v; })*
            };
        }
        set!(
            robot_radius,
            v_max,
            v_min,
            omega_max,
            a_max,
            obstacle_clearance,
            w_time,
            w_obstacle,
            w_viapoint,
            w_kinematic,
            w_velocity,
            iterations,
            step_size
        );
    }
}

/// Root of a config file. Top-level scalars and the planner table override
/// per key; other tables parse with their own defaults for unset keys, which
/// are the same built-in defaults, so the per-key semantics hold throughout.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootConfig {
    /// Planner preset base: "sim-tuned" or "real-params".
    pub preset: Option<String>,
    pub mode: Option<PerceptionMode>,
    pub sim_dt: Option<f64>,
    pub edge_masking: Option<bool>,
    pub smoothing: Option<bool>,
    pub alpha: Option<f64>,
    pub max_consecutive_infeasible: Option<usize>,
    pub inflation_padding: Option<f64>,
    pub rates: Option<Rates>,
    pub planner: Option<PlannerOverride>,
    pub csf: Option<ClothParams>,
    pub elevation: Option<ElevationParams>,
    pub lidar: Option<LidarSpec>,
    pub camera: Option<CameraConfig>,
    pub artifacts: Option<DepthArtifacts>,
    pub anchors: Option<AnchorModel>,
    pub mono: Option<MonoChain>,
}

impl RootConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigLoadError> {
        toml::from_str(text).map_err(|e| ConfigLoadError::Parse {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    /// Layer this file onto the built-in defaults for `mode`.
    pub fn resolve(
        &self,
        mode_flag: Option<PerceptionMode>,
    ) -> Result<PipelineConfig, ConfigLoadError> {
        // Flag beats file beats default — also for the mode itself, which
        // picks the default perception rates.
        let mode = mode_flag.or(self.mode).unwrap_or(PerceptionMode::Lidar);
        let mut cfg = PipelineConfig::for_mode(mode);
        if let Some(name) = &self.preset {
            let preset =
                parse_preset(name).ok_or_else(|| ConfigLoadError::UnknownPreset(name.clone()))?;
            cfg.planner = PlannerConfig::preset(preset);
        }
        if let Some(p) = &self.planner {
            p.apply(&mut cfg.planner);
        }
        macro_rules! copy {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        copy!(
            sim_dt,
            edge_masking,
            smoothing,
            alpha,
            max_consecutive_infeasible,
            inflation_padding,
            rates,
            csf,
            elevation,
            lidar,
            camera,
            artifacts,
            anchors,
            mono
        );
        cfg.validate()
            .map_err(|e| ConfigLoadError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

/// Build the effective pipeline config from `--config` and `--mode`.
pub fn load_config(
    arg: Option<&ConfigArg>,
    mode_flag: Option<PerceptionMode>,
) -> Result<PipelineConfig, ConfigLoadError> {
    match arg {
        None => RootConfig::default().resolve(mode_flag),
        Some(ConfigArg::Preset(preset)) => {
            let mode = mode_flag.unwrap_or(PerceptionMode::Lidar);
            let mut cfg = PipelineConfig::for_mode(mode);
            cfg.planner = PlannerConfig::preset(*preset);
            cfg.validate()
                .map_err(|e| ConfigLoadError::Invalid(e.to_string()))?;
            Ok(cfg)
        }
        Some(ConfigArg::File(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigLoadError::Io {
                path: path.clone(),
                source: e,
            })?;
            RootConfig::from_toml(&text, path)?.resolve(mode_flag)
        }
    }
}
