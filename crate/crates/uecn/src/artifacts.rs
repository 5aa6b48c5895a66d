//! Versioned JSON stage artifacts.
//!
//! Every file is an envelope `{"format", "version", "scenario_sha256", "data"}`.
//! Non-finite numbers are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uecn_core::deploy::{Deployment, PlanIssue, VelocityMode};
use uecn_core::erm::ErmAssignment;
use uecn_core::moea::Evaluation;
use uecn_core::relay::{Method, NodeSelection};
use uecn_core::{LinkType, Point3};

use crate::config::Selection;
use crate::error::{Error, Result};

pub const VERSION: u32 = 1;

pub const RL_FILE: &str = "rl.json";
pub const PARTITION_FILE: &str = "partition.json";
pub const DEPLOYMENT_FILE: &str = "deployment.json";
pub const FRONT_FILE: &str = "front.json";
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.sha256";

/// Serde adapter for `f64` fields that may hold infinities or NaN.
pub mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<T> {
    format: String,
    version: u32,
    scenario_sha256: String,
    data: T,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(kind: &str, scenario_sha256: &str, data: &T) -> String {
    let env = Envelope {
        format: format!("uecn-{kind}"),
        version: VERSION,
        scenario_sha256: scenario_sha256.to_string(),
        data,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("artifact serializes");
    s.push('\n');
    s
}

pub fn write<T: Serialize>(path: &Path, kind: &str, scenario_sha256: &str, data: &T) -> Result<()> {
    fs::write(path, to_json(kind, scenario_sha256, data)).map_err(|e| Error::io(path, e))
}

/// Reads an artifact, checking its kind, version and scenario digest.
pub fn read<T: DeserializeOwned>(path: &Path, kind: &str, scenario_sha256: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    let want = format!("uecn-{kind}");
    if env.format != want || env.version != VERSION {
        return Err(Error::format(
            path,
            format!("expected {want} version {VERSION}, found {} version {}", env.format, env.version),
        ));
    }
    if env.scenario_sha256 != scenario_sha256 {
        return Err(Error::format(path, "artifact was produced from a different scenario"));
    }
    Ok(env.data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodResult {
    pub method: Method,
    pub relay: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trace {
    pub method: Method,
    /// Mean reward per episode.
    pub mean_reward: Vec<f64>,
}

/// Relay selection for one node outside the relay set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub node: usize,
    pub method: Method,
    pub relay: usize,
    pub reward: f64,
    pub baseline_relay: usize,
    pub baseline_reward: f64,
    pub optimum: f64,
    pub dqn_fallback: bool,
    pub results: Vec<MethodResult>,
    pub traces: Vec<Trace>,
}

impl From<&NodeSelection> for NodeRecord {
    fn from(n: &NodeSelection) -> Self {
        Self {
            node: n.node,
            method: n.best.0,
            relay: n.best.1.relay,
            reward: n.best.1.reward,
            baseline_relay: n.baseline.relay,
            baseline_reward: n.baseline.reward,
            optimum: n.optimum,
            dqn_fallback: n.dqn_fallback,
            results: n
                .results
                .iter()
                .map(|(m, c)| MethodResult {
                    method: *m,
                    relay: c.relay,
                    reward: c.reward,
                })
                .collect(),
            traces: n
                .traces
                .iter()
                .map(|(m, t)| Trace {
                    method: *m,
                    mean_reward: t.iter().map(|r| r.mean_reward).collect(),
                })
                .collect(),
        }
    }
}

/// `rl.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RlArtifact {
    /// Nodes reaching the USV directly.
    pub relays: Vec<usize>,
    pub nodes: Vec<NodeRecord>,
}

impl RlArtifact {
    pub fn choices(&self) -> Vec<(usize, usize)> {
        self.nodes.iter().map(|n| (n.node, n.relay)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayedRecord {
    pub id: usize,
    pub relay: usize,
    pub link: LinkType,
    pub capacity: f64,
    pub threshold: f64,
}

/// `partition.json`: direct, relayed and AUV-served nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionArtifact {
    pub direct: Vec<usize>,
    pub relayed: Vec<RelayedRecord>,
    pub isolated: Vec<usize>,
}

impl From<&ErmAssignment> for PartitionArtifact {
    fn from(a: &ErmAssignment) -> Self {
        Self {
            direct: a.set_a.clone(),
            relayed: a
                .set_b
                .iter()
                .map(|b| RelayedRecord {
                    id: b.id,
                    relay: b.relay,
                    link: b.budget.link,
                    capacity: b.budget.capacity,
                    threshold: b.threshold,
                })
                .collect(),
            isolated: a.set_c.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberRecord {
    pub id: usize,
    pub link: LinkType,
    #[serde(with = "float")]
    pub capacity: f64,
    pub tx_power: f64,
    #[serde(with = "float")]
    pub required_power: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuvRecord {
    pub auv: usize,
    pub position: Point3,
    pub velocity: f64,
    pub d_j0: f64,
    pub psi0: f64,
    pub psi1: f64,
    #[serde(with = "float")]
    pub t_r: f64,
    pub t_m: f64,
    pub e_r: f64,
    pub e_b: f64,
    pub e_l: f64,
    pub e_s: f64,
    pub e_e: f64,
    pub total_energy: f64,
    pub members: Vec<MemberRecord>,
    pub issues: Vec<String>,
}

/// `deployment.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentArtifact {
    pub velocity_mode: VelocityMode,
    pub x1_requested: usize,
    pub x1: usize,
    pub x2: f64,
    #[serde(with = "float")]
    pub makespan: f64,
    pub total_energy: f64,
    pub feasible: bool,
    pub auvs: Vec<AuvRecord>,
}

fn issue_text(i: &PlanIssue) -> String {
    match i {
        PlanIssue::InfeasibleLink(id) => format!("no link closes for node {id}"),
        PlanIssue::EnergyExhausted => "energy budget exhausted".into(),
        PlanIssue::DepthExceeded => "hover depth exceeds the diving limit".into(),
    }
}

impl DeploymentArtifact {
    pub fn new(d: &Deployment, mode: VelocityMode) -> Self {
        Self {
            velocity_mode: mode,
            x1_requested: d.x1_requested,
            x1: d.x1,
            x2: d.x2,
            makespan: d.makespan(),
            total_energy: d.total_energy(),
            feasible: d.feasible(),
            auvs: d
                .plans
                .iter()
                .map(|p| AuvRecord {
                    auv: p.auv,
                    position: p.cluster.centroid,
                    velocity: p.velocity,
                    d_j0: p.d_j0,
                    psi0: p.psi0,
                    psi1: p.psi1,
                    t_r: p.t_r,
                    t_m: p.t_m,
                    e_r: p.e_r,
                    e_b: p.e_b,
                    e_l: p.e_l,
                    e_s: p.e_s,
                    e_e: p.e_e,
                    total_energy: p.total_energy,
                    members: p
                        .links
                        .iter()
                        .map(|l| MemberRecord {
                            id: l.id,
                            link: l.budget.link,
                            capacity: l.budget.capacity,
                            tx_power: l.budget.tx_power,
                            required_power: l.required_power,
                            feasible: l.budget.feasible,
                        })
                        .collect(),
                    issues: p.issues.iter().map(issue_text).collect(),
                })
                .collect(),
        }
    }
}

/// One evaluated `(x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontPoint {
    pub x1: usize,
    pub x2: f64,
    #[serde(with = "float")]
    pub f1: f64,
    #[serde(with = "float")]
    pub f2: f64,
    pub feasible: bool,
    #[serde(with = "float")]
    pub constraint_violation: f64,
}

impl From<&Evaluation> for FrontPoint {
    fn from(e: &Evaluation) -> Self {
        Self {
            x1: e.x.x1,
            x2: e.x.x2,
            f1: e.f.f1,
            f2: e.f.f2,
            feasible: e.f.feasible,
            constraint_violation: e.f.constraint_violation,
        }
    }
}

/// `front.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontArtifact {
    pub evaluations: usize,
    pub z_star: [FiniteOr; 2],
    /// Non-dominated feasible points, ascending makespan.
    pub archive: Vec<FrontPoint>,
    /// Reported only when nothing feasible was found.
    pub least_infeasible: Option<FrontPoint>,
    pub knee: Option<FrontPoint>,
    pub energy_efficiency: Option<FrontPoint>,
    pub selection: Selection,
    pub selected: Option<FrontPoint>,
    /// One AUV serving every isolated node at the selected power.
    pub single_auv: Option<FrontPoint>,
    /// Makespan saved by the selected point relative to `single_auv`.
    pub time_saving_percent: Option<f64>,
}

/// An `f64` that tolerates non-finite values in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteOr(#[serde(with = "float")] pub f64);
