//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uam_core::fleet::{generate_scenario, FleetScenario, ScenarioConfig, SoaConfig};
use uam_core::planner::{AircraftPerformance, SmoothOptions, TrackQuery};
use uam_core::risk::RiskParams;
use uam_core::scene::UrbanScene;

use crate::error::{Result, ToolError};
use crate::io::{self, SceneConfig};

/// Height raster plus its scene config, both relative to the experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSource {
    pub raster: PathBuf,
    pub config: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedQuery {
    pub name: String,
    #[serde(flatten)]
    pub query: TrackQuery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FleetSource {
    /// Scenario JSON file.
    File(PathBuf),
    /// Synthetic day over the bundled network; the seed is replaced by the
    /// run seed.
    Generate(ScenarioConfig),
}

impl Default for FleetSource {
    fn default() -> Self {
        FleetSource::Generate(ScenarioConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    /// Altitude slices (m).
    pub altitudes: Vec<f64>,
    /// Horizontal cell sizes (m), whole multiples of the raster cell.
    pub cell_sizes: Vec<f64>,
    /// Flights per aircraft F.
    pub flights: Vec<u32>,
    /// Cruise speeds v_g (m/s).
    pub speeds: Vec<f64>,
    /// Risk weights; the transport weight is `1 - w`.
    pub w_risk: Vec<f64>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.altitudes.is_empty() && self.cell_sizes.is_empty() && self.flights.is_empty() && self.speeds.is_empty() && self.w_risk.is_empty()
    }
}

fn default_layers() -> Vec<f64> {
    vec![100.0, 160.0, 220.0]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scene: Option<SceneSource>,
    #[serde(default)]
    pub risk: RiskParams,
    /// Altitudes (m) of the layers drawn by `risk-map`.
    #[serde(default = "default_layers")]
    pub layers: Vec<f64>,
    #[serde(default)]
    pub performance: AircraftPerformance,
    #[serde(default)]
    pub queries: Vec<NamedQuery>,
    #[serde(default)]
    pub smoothing: SmoothOptions,
    #[serde(default)]
    pub fleet: FleetSource,
    #[serde(default)]
    pub optimizer: SoaConfig,
    #[serde(default)]
    pub sweep: SweepAxes,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Write measured run times; off gives byte-identical reruns.
    #[serde(default = "yes")]
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl ExperimentConfig {
    /// Reads the file and makes its relative paths absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(s) = &mut self.scene {
            s.raster = base.join(&s.raster);
            s.config = base.join(&s.config);
        }
        if let FleetSource::File(p) = &mut self.fleet {
            *p = base.join(&*p);
        }
    }

    pub fn scene(&self) -> Result<UrbanScene> {
        let src = self.scene.as_ref().ok_or_else(|| ToolError::validation("config has no scene"))?;
        let scene_cfg: SceneConfig = io::read_json(&src.config)?;
        io::load_scene(&src.raster, &scene_cfg)
    }

    /// Scenario for one run seed.
    pub fn scenario(&self, seed: u64) -> Result<FleetScenario> {
        match &self.fleet {
            FleetSource::File(p) => {
                let s: FleetScenario = io::read_json(p)?;
                s.validate()?;
                Ok(s)
            }
            FleetSource::Generate(c) => Ok(generate_scenario(&ScenarioConfig { seed, ..*c })?),
        }
    }

    pub fn optimizer_for(&self, seed: u64) -> SoaConfig {
        SoaConfig { seed, ..self.optimizer }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(ToolError::validation("seeds must not be empty"));
        }
        self.optimizer.validate()?;
        self.risk.validate()?;
        self.performance.validate()?;
        for q in &self.queries {
            q.query.validate().map_err(|e| ToolError::validation(format!("query {}: {e}", q.name)))?;
        }
        Ok(())
    }
}
