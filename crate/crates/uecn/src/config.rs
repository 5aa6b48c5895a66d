//! Run configuration and scenario files (TOML).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uecn_core::deploy::{DeployOptions, VelocityMode};
use uecn_core::moea::{self, MoeadConfig};
use uecn_core::relay::RelayConfig;
use uecn_core::{generate_scenario, validate_scenario, Scenario, ScenarioConfig};

use crate::error::{Error, Result};

pub const SCENARIO_FORMAT: &str = "uecn-scenario";
pub const SCENARIO_VERSION: u32 = 1;

/// Which archived point the optimizer reports as its choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Most balanced normalized tradeoff.
    #[default]
    Knee,
    /// Least energy per second of makespan.
    EnergyEfficiency,
}

/// `[scenario]`: at most one of `file` and `generate`; neither means the
/// default generated scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub file: Option<PathBuf>,
    pub generate: Option<ScenarioConfig>,
}

/// `[deploy]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploySettings {
    pub velocity_mode: VelocityMode,
    /// AUV count; defaults to the fewest AUVs the capacity allows.
    pub x1: Option<usize>,
    /// Isolated-node transmit power in watts; defaults to the largest link maximum.
    pub x2: Option<f64>,
    /// Overrides the scenario's per-AUV capacity.
    pub n_max: Option<usize>,
}

impl DeploySettings {
    pub fn options(&self) -> DeployOptions {
        DeployOptions {
            velocity_mode: self.velocity_mode,
            n_max: self.n_max,
        }
    }
}

/// `[mop]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MopSettings {
    pub subproblems: usize,
    pub neighbourhood: usize,
    pub generations: usize,
    pub blend_alpha: f64,
    pub mutation_rate: f64,
    pub mutation_scale: f64,
    /// Snap `x2` to this many evenly spaced levels up to the largest link maximum.
    pub x2_levels: Option<usize>,
    pub selection: Selection,
}

impl Default for MopSettings {
    fn default() -> Self {
        let d = MoeadConfig::default();
        Self {
            subproblems: d.subproblems,
            neighbourhood: d.neighbourhood,
            generations: d.generations,
            blend_alpha: d.blend_alpha,
            mutation_rate: d.mutation_rate,
            mutation_scale: d.mutation_scale,
            x2_levels: None,
            selection: Selection::Knee,
        }
    }
}

impl MopSettings {
    pub fn moead(&self, p_max: f64, deploy: DeployOptions) -> MoeadConfig {
        MoeadConfig {
            subproblems: self.subproblems,
            neighbourhood: self.neighbourhood,
            generations: self.generations,
            blend_alpha: self.blend_alpha,
            mutation_rate: self.mutation_rate,
            mutation_scale: self.mutation_scale,
            x2_levels: self.x2_levels.map(|n| moea::power_levels(n, p_max)),
            deploy,
        }
    }
}

/// The config file as written.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub scenario: ScenarioSection,
    pub rl: RelayConfig,
    pub deploy: DeploySettings,
    pub mop: MopSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    File(PathBuf),
    Generate(ScenarioConfig),
}

/// A resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Seeds scenario generation, clustering, learning and the optimizer.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub scenario: ScenarioSource,
    pub rl: RelayConfig,
    pub deploy: DeploySettings,
    pub mop: MopSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_config_file(ConfigFile::default(), Path::new(".")).expect("default config is valid")
    }
}

impl RunConfig {
    /// Reads a config file; a relative scenario path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_config_file(file, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_config_file(file: ConfigFile, base: &Path) -> Result<Self> {
        let scenario = match (file.scenario.file, file.scenario.generate) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "[scenario] takes either `file` or `generate`, not both".into(),
                ))
            }
            (Some(p), None) => ScenarioSource::File(if p.is_relative() { base.join(p) } else { p }),
            (None, g) => ScenarioSource::Generate(g.unwrap_or_default()),
        };
        if file.mop.subproblems < 2 || file.mop.neighbourhood == 0 {
            return Err(Error::Config("[mop] needs subproblems >= 2 and neighbourhood >= 1".into()));
        }
        if file.mop.x2_levels == Some(0) {
            return Err(Error::Config("[mop] x2_levels must be at least 1".into()));
        }
        Ok(Self {
            seed: file.seed.unwrap_or(1),
            out_dir: file.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            scenario,
            rl: file.rl,
            deploy: file.deploy,
            mop: file.mop,
        })
    }

    /// Builds or reads the scenario and stamps it with the run seed.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut s = match &self.scenario {
            ScenarioSource::Generate(g) => generate_scenario(g, self.seed).map_err(|e| Error::Config(e.to_string()))?,
            ScenarioSource::File(p) => read_scenario(p)?,
        };
        s.seed = self.seed;
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    format: String,
    version: u32,
    scenario: Scenario,
}

/// TOML text of a scenario; floats round-trip exactly.
pub fn scenario_to_toml(s: &Scenario) -> String {
    let file = ScenarioFile {
        format: SCENARIO_FORMAT.into(),
        version: SCENARIO_VERSION,
        scenario: s.clone(),
    };
    toml::to_string(&file).expect("scenario serializes")
}

pub fn scenario_from_toml(text: &str, path: &Path) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::format(path, e))?;
    if file.format != SCENARIO_FORMAT || file.version != SCENARIO_VERSION {
        return Err(Error::format(
            path,
            format!(
                "expected {SCENARIO_FORMAT} version {SCENARIO_VERSION}, found {} version {}",
                file.format, file.version
            ),
        ));
    }
    let violations = validate_scenario(&file.scenario);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::Config(format!("{}: {}", path.display(), list.join("; "))));
    }
    Ok(file.scenario)
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    scenario_from_toml(&text, path)
}

pub fn write_scenario(path: &Path, s: &Scenario) -> Result<()> {
    fs::write(path, scenario_to_toml(s)).map_err(|e| Error::io(path, e))
}
