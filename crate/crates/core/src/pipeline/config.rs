//! Flat key-value pipeline configuration (TOML).
//!
//! Every key is optional; missing keys take the defaults shown by
//! `envsynth print-config`. Relative paths resolve against the directory
//! holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterConfig;
use crate::error::{Error, Result};
use crate::extraction::ExtractionConfig;
use crate::gan::{GanTrainConfig, GeneratorLoss};
use crate::sim::{DeployConfig, PlannerParams, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gan,
    Pca,
    Rs,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gan" => Ok(Self::Gan),
            "pca" => Ok(Self::Pca),
            "rs" => Ok(Self::Rs),
            other => Err(Error::config(format!("unknown method {other:?} (expected gan, pca or rs)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gan => "gan",
            Self::Pca => "pca",
            Self::Rs => "rs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub maps_dir: PathBuf,
    pub traces_dir: PathBuf,
    pub envs_dir: PathBuf,
    pub models_dir: PathBuf,
    pub reports_dir: PathBuf,
    /// Meters per pixel of the map images.
    pub map_resolution: f64,
    pub seed: u64,
    pub method: Method,
    /// Number of synthesized environments.
    pub count: usize,

    pub segment_length: f64,
    pub difficulty_threshold: u64,
    /// Lidar range, used by both the simulator and extraction.
    pub max_range: f64,

    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub d_steps_per_g_step: usize,
    pub generator_loss: GeneratorLoss,
    pub latent_dim: usize,

    pub pca_components: usize,
    pub clusters: usize,
    pub per_cluster: usize,

    pub max_linear_velocity: f64,
    pub max_angular_velocity: f64,
    pub sample_count: usize,
    pub inflation_radius: f64,
    pub recovery_reverse_velocity: f64,

    pub timestep: f64,
    pub beam_count: usize,
    pub goal_tolerance: f64,
    pub max_steps: usize,
    pub robot_radius: f64,
    pub recovery_steps: usize,

    pub deployments_per_map: usize,
    pub min_separation: f64,
    pub max_pair_attempts: usize,

    /// Planner parameter grid, e.g. `"max_linear_velocity=0.5,1.0;sample_count=10,20"`.
    pub candidates: String,
    pub trials_per_env: usize,
    /// Candidates below this success rate are not eligible for selection.
    pub success_floor: f64,
    /// Environment set scored by `evaluate`.
    pub eval_set: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let ex = ExtractionConfig::default();
        let gan = GanTrainConfig::default();
        let cl = ClusterConfig::default();
        let pp = PlannerParams::default();
        let sim = SimConfig::default();
        let dep = DeployConfig::default();
        Self {
            maps_dir: "maps".into(),
            traces_dir: "traces".into(),
            envs_dir: "envs".into(),
            models_dir: "models".into(),
            reports_dir: "reports".into(),
            map_resolution: 0.1,
            seed: 0,
            method: Method::Gan,
            count: 100,
            segment_length: ex.segment_length,
            difficulty_threshold: ex.difficulty_threshold,
            max_range: ex.max_range,
            epochs: gan.epochs,
            batch_size: gan.batch_size,
            learning_rate: gan.learning_rate,
            adam_beta1: gan.adam_beta1,
            adam_beta2: gan.adam_beta2,
            adam_epsilon: gan.adam_epsilon,
            d_steps_per_g_step: gan.d_steps_per_g_step,
            generator_loss: gan.generator_loss,
            latent_dim: gan.latent_dim,
            pca_components: cl.k,
            clusters: cl.m,
            per_cluster: cl.n,
            max_linear_velocity: pp.max_linear_velocity,
            max_angular_velocity: pp.max_angular_velocity,
            sample_count: pp.sample_count,
            inflation_radius: pp.inflation_radius,
            recovery_reverse_velocity: pp.recovery_reverse_velocity,
            timestep: sim.timestep,
            beam_count: sim.beam_count,
            goal_tolerance: sim.goal_tolerance,
            max_steps: sim.max_steps,
            robot_radius: sim.robot_radius,
            recovery_steps: sim.recovery_steps,
            deployments_per_map: dep.deployments_per_map,
            min_separation: dep.min_separation,
            max_pair_attempts: dep.max_pair_attempts,
            candidates: "max_linear_velocity=0.5,1.0;sample_count=10,20".into(),
            trials_per_env: 20,
            success_floor: 0.5,
            eval_set: "synthesized".into(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Load `path`, returning the config and the directory paths resolve against.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let root = if root.as_os_str().is_empty() { PathBuf::from(".") } else { root };
        cfg.validate()?;
        Ok((cfg, root))
    }

    pub fn extraction(&self) -> ExtractionConfig {
        ExtractionConfig {
            segment_length: self.segment_length,
            difficulty_threshold: self.difficulty_threshold,
            max_range: self.max_range,
        }
    }

    pub fn gan(&self) -> GanTrainConfig {
        GanTrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_epsilon: self.adam_epsilon,
            seed: self.seed,
            d_steps_per_g_step: self.d_steps_per_g_step,
            generator_loss: self.generator_loss,
            latent_dim: self.latent_dim,
        }
    }

    pub fn cluster(&self) -> ClusterConfig {
        ClusterConfig {
            k: self.pca_components,
            m: self.clusters,
            n: self.per_cluster,
        }
    }

    pub fn planner(&self) -> PlannerParams {
        PlannerParams {
            max_linear_velocity: self.max_linear_velocity,
            max_angular_velocity: self.max_angular_velocity,
            sample_count: self.sample_count,
            inflation_radius: self.inflation_radius,
            recovery_reverse_velocity: self.recovery_reverse_velocity,
        }
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            timestep: self.timestep,
            beam_count: self.beam_count,
            max_range: self.max_range,
            goal_tolerance: self.goal_tolerance,
            max_steps: self.max_steps,
            robot_radius: self.robot_radius,
            recovery_steps: self.recovery_steps,
            ..SimConfig::default()
        }
    }

    pub fn deploy(&self) -> DeployConfig {
        DeployConfig {
            deployments_per_map: self.deployments_per_map,
            min_separation: self.min_separation,
            max_pair_attempts: self.max_pair_attempts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.extraction().validate()?;
        self.planner().validate()?;
        self.sim().validate()?;
        if !(self.map_resolution > 0.0) {
            return Err(Error::config("map_resolution must be positive"));
        }
        if self.trials_per_env == 0 {
            return Err(Error::config("trials_per_env must be positive"));
        }
        if !(0.0..=1.0).contains(&self.success_floor) {
            return Err(Error::config("success_floor must lie in [0, 1]"));
        }
        if self.method == Method::Pca && self.clusters * self.per_cluster != self.count {
            return Err(Error::config(format!(
                "method pca needs clusters × per_cluster = count, got {} × {} ≠ {}",
                self.clusters, self.per_cluster, self.count
            )));
        }
        parse_candidates(&self.candidates, &self.planner())?;
        Ok(())
    }
}

/// Expand a `key=v1,v2;key2=...` grid over `base`. The first key varies
/// slowest. An empty string yields `base` alone.
pub fn parse_candidates(spec: &str, base: &PlannerParams) -> Result<Vec<PlannerParams>> {
    let mut out = vec![base.clone()];
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| Error::config(format!("candidate entry {part:?} lacks '='")))?;
        let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(Error::config(format!("candidate key {key:?} has no values")));
        }
        let mut next = Vec::with_capacity(out.len() * values.len());
        for p in &out {
            for v in &values {
                let mut q = p.clone();
                set_param(&mut q, key.trim(), v)?;
                next.push(q);
            }
        }
        out = next;
    }
    for p in &out {
        p.validate()?;
    }
    Ok(out)
}

fn set_param(p: &mut PlannerParams, key: &str, value: &str) -> Result<()> {
    let num = || {
        value
            .parse::<f64>()
            .map_err(|_| Error::config(format!("candidate value {value:?} for {key} is not a number")))
    };
    match key {
        "max_linear_velocity" => p.max_linear_velocity = num()?,
        "max_angular_velocity" => p.max_angular_velocity = num()?,
        "inflation_radius" => p.inflation_radius = num()?,
        "recovery_reverse_velocity" => p.recovery_reverse_velocity = num()?,
        "sample_count" => {
            p.sample_count = value
                .parse()
                .map_err(|_| Error::config(format!("sample_count value {value:?} is not an integer")))?
        }
        other => return Err(Error::config(format!("unknown planner parameter {other:?}"))),
    }
    Ok(())
}
