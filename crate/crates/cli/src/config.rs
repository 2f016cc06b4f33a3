//! Scenario files: one JSON document, SI units throughout.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use loiter_core::fleet::{FailureEvent, FleetConfig, LossSelection};
use loiter_core::geometry::{
    coverage_radius, min_turn_radius, AreaSpec, LoiterCircle, PlatformModel, SensorModel,
    Table1Mode, TurnRadiusModel, Vec2,
};
use loiter_core::packing::{PackingStrategy, StrategyRegistry};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area: AreaConfig,
    #[serde(default)]
    pub sensor: Option<SensorConfig>,
    #[serde(default)]
    pub r_c_m: Option<f64>,
    pub platform: PlatformConfig,
    #[serde(default = "default_packing")]
    pub packing: String,
    #[serde(default)]
    pub deployment: Option<DeploymentConfig>,
    #[serde(default)]
    pub r_l_max_m: Option<f64>,
    #[serde(default)]
    pub r_com_m: Option<f64>,
    #[serde(default)]
    pub base_station_m: Option<[f64; 2]>,
    #[serde(default)]
    pub failures: Vec<FailureConfig>,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub transit: TransitConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub path: Option<PathConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub table1_mode: Option<Table1ModeName>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_packing() -> String {
    "hexagon".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub x_extent_m: f64,
    pub y_extent_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub fov_half_angle_rad: f64,
    pub altitude_m: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TurnModelName {
    #[default]
    Paper,
    Standard,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformConfig {
    pub speed_mps: f64,
    #[serde(default)]
    pub max_bank_rad: Option<f64>,
    #[serde(default = "default_gravity")]
    pub gravity_mps2: f64,
    #[serde(default)]
    pub turn_model: TurnModelName,
    #[serde(default)]
    pub r_min_turn_m: Option<f64>,
}

fn default_gravity() -> f64 {
    9.81
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentConfig {
    #[serde(default)]
    pub radius_m: Option<f64>,
    #[serde(default)]
    pub budget_n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureConfig {
    pub time_s: f64,
    #[serde(default)]
    pub ids: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default)]
    pub grid_pitch_m: Option<f64>,
    #[serde(default = "default_phase_samples")]
    pub phase_samples: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { grid_pitch_m: None, phase_samples: default_phase_samples() }
    }
}

fn default_phase_samples() -> usize {
    36
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitConfig {
    #[serde(default)]
    pub turn_radius_m: Option<f64>,
    #[serde(default = "default_threshold")]
    pub separation_threshold_m: f64,
    #[serde(default = "default_sep_dt")]
    pub separation_dt_s: f64,
    #[serde(default = "default_rounds")]
    pub max_stagger_rounds: usize,
    #[serde(default = "default_sample_dt")]
    pub sample_dt_s: f64,
}

impl Default for TransitConfig {
    fn default() -> Self {
        Self {
            turn_radius_m: None,
            separation_threshold_m: default_threshold(),
            separation_dt_s: default_sep_dt(),
            max_stagger_rounds: default_rounds(),
            sample_dt_s: default_sample_dt(),
        }
    }
}

fn default_threshold() -> f64 {
    2.0
}
fn default_sep_dt() -> f64 {
    0.1
}
fn default_rounds() -> usize {
    10
}
fn default_sample_dt() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub r_init_m: Vec<f64>,
    pub loss_fractions: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub center_m: [f64; 2],
    pub radius_m: f64,
}

impl CircleConfig {
    fn circle(&self, what: &str) -> Result<LoiterCircle> {
        let c = Vec2::new(self.center_m[0], self.center_m[1]);
        if !(self.radius_m > 0.0 && self.radius_m.is_finite() && c.is_finite()) {
            bail!("{what} circle needs a finite center and positive radius");
        }
        Ok(LoiterCircle::ccw(c, self.radius_m))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub source: CircleConfig,
    pub target: CircleConfig,
    #[serde(default)]
    pub source_phase_rad: f64,
    #[serde(default)]
    pub uav_id: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Table1ModeName {
    Paper,
    Exact,
}

impl From<Table1ModeName> for Table1Mode {
    fn from(m: Table1ModeName) -> Self {
        match m {
            Table1ModeName::Paper => Table1Mode::Paper,
            Table1ModeName::Exact => Table1Mode::Exact,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid_pitch: Option<f64>,
    pub phase_samples: Option<usize>,
    pub table1_mode: Option<Table1ModeName>,
}

#[derive(Debug, Clone)]
pub enum Deployment {
    Radius(f64),
    Budget(usize),
}

/// A validated scenario with derived quantities resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub raw: ScenarioConfig,
    pub area: AreaSpec,
    pub strategy: Arc<dyn PackingStrategy>,
    pub r_c: f64,
    pub r_min_turn: f64,
    pub speed: f64,
    pub deployment: Option<Deployment>,
    pub failures: Vec<FailureEvent>,
    pub grid_pitch: f64,
    pub phase_samples: usize,
    pub seed: u64,
    pub table1_mode: Table1Mode,
    pub out_dir: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(anyhow!("{name} must be a positive number, got {v}"))
    }
}

impl Scenario {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let raw: ScenarioConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Self::resolve(raw, ov)
    }

    pub fn resolve(raw: ScenarioConfig, ov: &Overrides) -> Result<Self> {
        let area = AreaSpec::new(raw.area.x_extent_m, raw.area.y_extent_m)
            .map_err(|e| anyhow!("area: {e}"))?;
        let strategy = StrategyRegistry::with_builtins().get(&raw.packing).map_err(|e| anyhow!("{e}"))?;

        let r_c = match (&raw.sensor, raw.r_c_m) {
            (Some(s), None) => coverage_radius(&SensorModel { fov_half_angle: s.fov_half_angle_rad, altitude: s.altitude_m })
                .map_err(|e| anyhow!("sensor: {e}"))?,
            (None, Some(r)) => positive("r_c_m", r)?,
            _ => bail!("give exactly one of `sensor` or `r_c_m`"),
        };

        let p = &raw.platform;
        let speed = positive("platform.speed_mps", p.speed_mps)?;
        let r_min_turn = match (p.max_bank_rad, p.r_min_turn_m) {
            (Some(bank), None) => {
                let model = match p.turn_model {
                    TurnModelName::Paper => TurnRadiusModel::Paper,
                    TurnModelName::Standard => TurnRadiusModel::Standard,
                };
                min_turn_radius(&PlatformModel { speed, max_bank: bank, gravity: p.gravity_mps2 }, model)
                    .map_err(|e| anyhow!("platform: {e}"))?
            }
            (None, Some(r)) => positive("platform.r_min_turn_m", r)?,
            _ => bail!("give exactly one of `platform.max_bank_rad` or `platform.r_min_turn_m`"),
        };

        let deployment = match &raw.deployment {
            None => None,
            Some(DeploymentConfig { radius_m: Some(r), budget_n: None }) => {
                Some(Deployment::Radius(positive("deployment.radius_m", *r)?))
            }
            Some(DeploymentConfig { radius_m: None, budget_n: Some(n) }) => Some(Deployment::Budget(*n)),
            Some(_) => bail!("deployment needs exactly one of `radius_m` or `budget_n`"),
        };

        let seed = ov.seed.or(raw.seed).unwrap_or(0);
        let failures = raw
            .failures
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if !(f.time_s >= 0.0 && f.time_s.is_finite()) {
                    bail!("failures[{i}].time_s must be a non-negative time");
                }
                let selection = match (&f.ids, f.seed, f.count) {
                    (Some(ids), None, None) => LossSelection::Ids(ids.clone()),
                    (None, s, Some(count)) => LossSelection::Random { seed: ov.seed.or(s).unwrap_or(seed), count },
                    _ => bail!("failures[{i}] needs either `ids` or `count` (with optional `seed`)"),
                };
                Ok(FailureEvent { time: f.time_s, selection })
            })
            .collect::<Result<Vec<_>>>()?;

        if let Some(r) = raw.r_l_max_m {
            positive("r_l_max_m", r)?;
        }
        if let Some(r) = raw.r_com_m {
            positive("r_com_m", r)?;
        }
        let grid_pitch = match ov.grid_pitch.or(raw.validation.grid_pitch_m) {
            Some(g) => positive("grid pitch", g)?,
            None => r_c / loiter_core::coverage::DEFAULT_GRID_DIVISOR,
        };
        let phase_samples = ov.phase_samples.unwrap_or(raw.validation.phase_samples);
        if phase_samples < loiter_core::coverage::MIN_PHASE_SAMPLES {
            bail!(
                "phase samples must be at least {}, got {phase_samples}",
                loiter_core::coverage::MIN_PHASE_SAMPLES
            );
        }
        let t = &raw.transit;
        positive("transit.separation_dt_s", t.separation_dt_s)?;
        positive("transit.sample_dt_s", t.sample_dt_s)?;
        if !(t.separation_threshold_m >= 0.0) {
            bail!("transit.separation_threshold_m must be non-negative");
        }
        if let Some(r) = t.turn_radius_m {
            positive("transit.turn_radius_m", r)?;
        }
        let table1_mode = ov.table1_mode.or(raw.table1_mode).map(Table1Mode::from).unwrap_or_default();
        let out_dir = ov.out.clone().or_else(|| raw.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));

        Ok(Self {
            area,
            strategy,
            r_c,
            r_min_turn,
            speed,
            deployment,
            failures,
            grid_pitch,
            phase_samples,
            seed,
            table1_mode,
            out_dir,
            raw,
        })
    }

    pub fn fleet_config(&self) -> FleetConfig {
        let mut cfg = FleetConfig::new(self.area, self.strategy.clone(), self.r_c, self.r_min_turn, self.speed);
        cfg.r_l_max = self.raw.r_l_max_m;
        cfg.r_com = self.raw.r_com_m;
        if let Some([x, y]) = self.raw.base_station_m {
            cfg.base_station = Vec2::new(x, y);
        }
        cfg.transit_turn_radius = self.raw.transit.turn_radius_m;
        cfg.separation_threshold = self.raw.transit.separation_threshold_m;
        cfg.separation_dt = self.raw.transit.separation_dt_s;
        cfg.max_stagger_rounds = self.raw.transit.max_stagger_rounds;
        cfg
    }

    pub fn r_l_max(&self) -> f64 {
        self.fleet_config().r_l_max()
    }

    pub fn transit_turn_radius(&self) -> f64 {
        self.raw.transit.turn_radius_m.unwrap_or(self.r_min_turn)
    }

    pub fn path_circles(&self) -> Result<(LoiterCircle, LoiterCircle)> {
        let p = self.raw.path.as_ref().ok_or_else(|| anyhow!("config has no `path` section"))?;
        Ok((p.source.circle("source")?, p.target.circle("target")?))
    }
}
