//! Stage orchestration: scenario → relay selection → mode partition →
//! AUV deployment → Pareto search → plot series.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use uecn_core::deploy::{self, DeployOptions};
use uecn_core::erm;
use uecn_core::moea::{self, DecisionVector};
use uecn_core::relay::{self, Method};
use uecn_core::Scenario;

use crate::artifacts::{
    self, DeploymentArtifact, FiniteOr, FrontArtifact, FrontPoint, PartitionArtifact, RlArtifact, DEPLOYMENT_FILE,
    FRONT_FILE, MANIFEST_FILE, PARTITION_FILE, REPORT_FILE, RL_FILE, SCENARIO_FILE,
};
use crate::config::{self, RunConfig, Selection};
use crate::error::{Error, Result};
use crate::manifest;
use crate::plots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Generate,
    Rl,
    Erm,
    Deploy,
    Mop,
    Plots,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Generate, Stage::Rl, Stage::Erm, Stage::Deploy, Stage::Mop, Stage::Plots];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Rl => "rl",
            Stage::Erm => "erm",
            Stage::Deploy => "deploy",
            Stage::Mop => "mop",
            Stage::Plots => "plots",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSizes {
    pub direct: usize,
    pub relayed: usize,
    pub isolated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMean {
    pub method: Method,
    pub mean_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlSummary {
    pub nodes: usize,
    pub per_method: Vec<MethodMean>,
    /// Mean over nodes of the best method's reward.
    pub best_of_methods: f64,
    /// Mean over nodes of the nearest-relay reward.
    pub nearest_relay: f64,
    pub dqn_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSummary {
    pub x1: usize,
    pub x2: f64,
    #[serde(with = "artifacts::float")]
    pub makespan: f64,
    pub total_energy: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MopSummary {
    pub archive_size: usize,
    pub selection: Selection,
    pub selected: Option<FrontPoint>,
    pub single_auv: Option<FrontPoint>,
    pub time_saving_percent: Option<f64>,
}

/// What a run did. Written to `report.json`; wall-clock timings are kept
/// out of it so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub nodes: usize,
    pub scenario_sha256: String,
    pub stages: Vec<Stage>,
    pub partition: Option<PartitionSizes>,
    pub rl: Option<RlSummary>,
    pub deployment: Option<DeploymentSummary>,
    pub mop: Option<MopSummary>,
    pub notices: Vec<String>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Vec<(Stage, Duration)>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    s: Scenario,
    digest: String,
    dir: &'a Path,
    rl: Option<RlArtifact>,
    partition: Option<PartitionArtifact>,
    report: RunReport,
}

impl Ctx<'_> {
    fn write<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) -> Result<()> {
        artifacts::write(&self.dir.join(name), kind, &self.digest, data)?;
        self.report.files.push(name.to_string());
        Ok(())
    }

    fn load<T: serde::de::DeserializeOwned>(&self, stage: Stage, name: &str, kind: &str) -> Result<T> {
        let path = self.dir.join(name);
        if !path.exists() {
            return Err(Error::StageInputMissing {
                stage: stage.name(),
                path,
            });
        }
        artifacts::read(&path, kind, &self.digest)
    }

    fn partition(&mut self, stage: Stage) -> Result<PartitionArtifact> {
        if self.partition.is_none() {
            self.partition = Some(self.load(stage, PARTITION_FILE, "partition")?);
        }
        Ok(self.partition.clone().expect("loaded above"))
    }

    fn skip(&mut self, stage: Stage) {
        self.report
            .notices
            .push(format!("{}: no isolated nodes, stage skipped", stage.name()));
    }

    fn generate(&mut self) -> Result<()> {
        config::write_scenario(&self.dir.join(SCENARIO_FILE), &self.s)?;
        self.report.files.push(SCENARIO_FILE.into());
        Ok(())
    }

    fn rl(&mut self) -> Result<()> {
        let det = erm::detect_relays(&self.s);
        let sels = relay::select_relays(&self.s, &det, &self.cfg.rl).map_err(|e| Error::stage("rl", e))?;
        let art = RlArtifact {
            relays: det.relays.clone(),
            nodes: sels.iter().map(Into::into).collect(),
        };
        if art.relays.is_empty() {
            self.report
                .notices
                .push("rl: no node reaches the USV directly, nothing to relay through".into());
        }
        self.report.rl = Some(summarize_rl(&art, &self.cfg.rl.enabled()));
        self.write(RL_FILE, "rl", &art)?;
        self.rl = Some(art);
        Ok(())
    }

    fn erm(&mut self) -> Result<()> {
        let rl = match self.rl.take() {
            Some(r) => r,
            None => self.load(Stage::Erm, RL_FILE, "rl")?,
        };
        let a = erm::partition_erm(&self.s, &rl.relays, &rl.choices()).map_err(|e| Error::stage("erm", e))?;
        let art = PartitionArtifact::from(&a);
        self.write(PARTITION_FILE, "partition", &art)?;
        self.partition = Some(art);
        self.rl = Some(rl);
        Ok(())
    }

    fn deploy(&mut self) -> Result<()> {
        let part = self.partition(Stage::Deploy)?;
        if part.isolated.is_empty() {
            self.skip(Stage::Deploy);
            return Ok(());
        }
        let d = &self.cfg.deploy;
        let n_max = d.n_max.unwrap_or(self.s.n_max).max(1);
        let x1 = d.x1.unwrap_or(part.isolated.len().div_ceil(n_max));
        let x2 = d.x2.unwrap_or(self.s.links.max_power());
        if x1 == 0 || x1 > part.isolated.len() || !(0.0..=self.s.links.max_power()).contains(&x2) {
            return Err(Error::Config(format!(
                "[deploy] needs 1 <= x1 <= {} and 0 <= x2 <= {}",
                part.isolated.len(),
                self.s.links.max_power()
            )));
        }
        let dep = deploy::deploy(&self.s, &part.isolated, x1, x2, &d.options()).map_err(|e| Error::stage("deploy", e))?;
        let art = DeploymentArtifact::new(&dep, d.velocity_mode);
        self.report.deployment = Some(DeploymentSummary {
            x1: art.x1,
            x2: art.x2,
            makespan: art.makespan,
            total_energy: art.total_energy,
            feasible: art.feasible,
        });
        self.write(DEPLOYMENT_FILE, "deployment", &art)
    }

    fn mop(&mut self) -> Result<()> {
        let part = self.partition(Stage::Mop)?;
        let c = &part.isolated;
        if c.is_empty() {
            self.skip(Stage::Mop);
            return Ok(());
        }
        let opts = self.cfg.deploy.options();
        let mc = self.cfg.mop.moead(self.s.links.max_power(), opts);
        let run = moea::moead_run(&self.s, c, &mc, self.cfg.seed).map_err(|e| Error::stage("mop", e))?;
        let entries = &run.archive.entries;
        let knee = moea::knee_select(entries);
        let ee = moea::energy_efficiency_select(entries);
        let selected = match self.cfg.mop.selection {
            Selection::Knee => knee,
            Selection::EnergyEfficiency => ee,
        };
        let single = selected.map(|sel| {
            let o = DeployOptions {
                n_max: Some(c.len()),
                ..opts
            };
            moea::evaluate(&self.s, c, DecisionVector { x1: 1, x2: sel.x.x2 }, &o)
        });
        let saving = match (selected, single) {
            (Some(a), Some(b)) if b.f.f1.is_finite() && b.f.f1 > 0.0 => Some(100.0 * (b.f.f1 - a.f.f1) / b.f.f1),
            _ => None,
        };
        if entries.is_empty() {
            self.report
                .notices
                .push("mop: no feasible (x1, x2) found; front.json lists the least violating point".into());
        }
        let art = FrontArtifact {
            evaluations: run.evaluations,
            z_star: run.archive.z_star.map(FiniteOr),
            archive: entries.iter().map(Into::into).collect(),
            least_infeasible: run.least_infeasible.as_ref().map(Into::into),
            knee: knee.as_ref().map(Into::into),
            energy_efficiency: ee.as_ref().map(Into::into),
            selection: self.cfg.mop.selection,
            selected: selected.as_ref().map(Into::into),
            single_auv: single.as_ref().map(Into::into),
            time_saving_percent: saving,
        };
        self.report.mop = Some(MopSummary {
            archive_size: art.archive.len(),
            selection: art.selection,
            selected: art.selected,
            single_auv: art.single_auv,
            time_saving_percent: saving,
        });
        self.write(FRONT_FILE, "front", &art)
    }

    fn plots(&mut self) -> Result<()> {
        let files = plots::emit_plots(self.dir, &self.s, &self.digest)?;
        self.report.files.extend(files);
        Ok(())
    }
}

fn summarize_rl(art: &RlArtifact, methods: &[Method]) -> RlSummary {
    let n = art.nodes.len();
    let mean = |f: &dyn Fn(&artifacts::NodeRecord) -> f64| {
        if n == 0 {
            0.0
        } else {
            art.nodes.iter().map(f).sum::<f64>() / n as f64
        }
    };
    RlSummary {
        nodes: n,
        per_method: methods
            .iter()
            .map(|&m| MethodMean {
                method: m,
                mean_reward: mean(&|r| r.results.iter().find(|x| x.method == m).map_or(0.0, |x| x.reward)),
            })
            .collect(),
        best_of_methods: mean(&|r| r.reward),
        nearest_relay: mean(&|r| r.baseline_reward),
        dqn_fallbacks: art.nodes.iter().filter(|r| r.dqn_fallback).count(),
    }
}

/// Runs `stages` in pipeline order. Each stage reads its upstream artifact
/// from the output directory unless an earlier stage of this run produced it.
/// Ends by writing `report.json` and a checksum manifest of this run's files.
pub fn run_pipeline(cfg: &RunConfig, stages: &[Stage]) -> Result<RunOutcome> {
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let s = cfg.scenario()?;
    let digest = manifest::sha256_hex(config::scenario_to_toml(&s).as_bytes());
    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();
    let mut ctx = Ctx {
        cfg,
        digest: digest.clone(),
        dir,
        rl: None,
        partition: None,
        report: RunReport {
            seed: cfg.seed,
            nodes: s.usns.len(),
            scenario_sha256: digest,
            stages: stages.clone(),
            partition: None,
            rl: None,
            deployment: None,
            mop: None,
            notices: Vec::new(),
            files: Vec::new(),
        },
        s,
    };
    let mut timings = Vec::new();
    for &stage in &stages {
        let t = Instant::now();
        match stage {
            Stage::Generate => ctx.generate()?,
            Stage::Rl => ctx.rl()?,
            Stage::Erm => ctx.erm()?,
            Stage::Deploy => ctx.deploy()?,
            Stage::Mop => ctx.mop()?,
            Stage::Plots => ctx.plots()?,
        }
        timings.push((stage, t.elapsed()));
    }
    if let Some(p) = &ctx.partition {
        ctx.report.partition = Some(PartitionSizes {
            direct: p.direct.len(),
            relayed: p.relayed.len(),
            isolated: p.isolated.len(),
        });
    }
    ctx.report.files.push(REPORT_FILE.into());
    let report_path = dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&ctx.report).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text).map_err(|e| Error::io(&report_path, e))?;
    manifest::write_manifest(dir, &ctx.report.files, MANIFEST_FILE)?;
    Ok(RunOutcome {
        report: ctx.report,
        timings,
    })
}
