//! Plot-ready CSV series.

use std::fs;
use std::path::{Path, PathBuf};

use uecn_core::Scenario;

use crate::artifacts::{
    self, DeploymentArtifact, FrontArtifact, PartitionArtifact, RlArtifact, DEPLOYMENT_FILE, FRONT_FILE,
    PARTITION_FILE, RL_FILE,
};
use crate::error::{Error, Result};

pub const PLOT_DIR: &str = "plots";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const TRACE_FILE: &str = "rl_trace.csv";
pub const CLUSTER_FILE: &str = "clusters.csv";
pub const FRONT_CSV: &str = "front.csv";

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::format(path, e))
}

fn row<I, T>(w: &mut csv::Writer<fs::File>, path: &Path, fields: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(fields).map_err(|e| Error::format(path, e))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn optional<T: serde::de::DeserializeOwned>(dir: &Path, name: &str, kind: &str, digest: &str) -> Result<Option<T>> {
    let path = dir.join(name);
    if path.exists() {
        artifacts::read(&path, kind, digest).map(Some)
    } else {
        Ok(None)
    }
}

/// Writes the four series under `dir/plots` from the artifacts in `dir`.
/// The partition is required; a missing later artifact yields a header-only
/// file. Returns the paths written, relative to `dir`.
pub fn emit_plots(dir: &Path, s: &Scenario, digest: &str) -> Result<Vec<String>> {
    let part_path = dir.join(PARTITION_FILE);
    if !part_path.exists() {
        return Err(Error::StageInputMissing {
            stage: "plots",
            path: part_path,
        });
    }
    let part: PartitionArtifact = artifacts::read(&part_path, "partition", digest)?;
    let rl: Option<RlArtifact> = optional(dir, RL_FILE, "rl", digest)?;
    let dep: Option<DeploymentArtifact> = optional(dir, DEPLOYMENT_FILE, "deployment", digest)?;
    let front: Option<FrontArtifact> = optional(dir, FRONT_FILE, "front", digest)?;

    let out = dir.join(PLOT_DIR);
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut written = Vec::new();
    let mut rel = |name: &str| -> PathBuf {
        written.push(format!("{PLOT_DIR}/{name}"));
        out.join(name)
    };

    let path = rel(SCATTER_FILE);
    let mut w = writer(&path)?;
    row(&mut w, &path, ["id", "x", "y", "z", "mode", "relay"])?;
    for n in &s.usns {
        let (mode, relay) = if part.direct.contains(&n.id) {
            ("direct", String::new())
        } else if let Some(b) = part.relayed.iter().find(|b| b.id == n.id) {
            ("relayed", b.relay.to_string())
        } else {
            ("isolated", String::new())
        };
        row(
            &mut w,
            &path,
            [n.id.to_string(), n.pos.x.to_string(), n.pos.y.to_string(), n.pos.z.to_string(), mode.into(), relay],
        )?;
    }
    finish(w, &path)?;

    let path = rel(TRACE_FILE);
    let mut w = writer(&path)?;
    row(&mut w, &path, ["node", "method", "episode", "mean_reward"])?;
    for n in rl.iter().flat_map(|r| &r.nodes) {
        for t in &n.traces {
            for (k, r) in t.mean_reward.iter().enumerate() {
                row(
                    &mut w,
                    &path,
                    [n.node.to_string(), t.method.name().into(), k.to_string(), r.to_string()],
                )?;
            }
        }
    }
    finish(w, &path)?;

    let path = rel(CLUSTER_FILE);
    let mut w = writer(&path)?;
    row(&mut w, &path, ["auv", "node", "x", "y", "z", "auv_x", "auv_y", "auv_z"])?;
    for a in dep.iter().flat_map(|d| &d.auvs) {
        for m in &a.members {
            let p = s.usn(m.id).map(|n| n.pos).unwrap_or_default();
            row(
                &mut w,
                &path,
                [
                    a.auv.to_string(),
                    m.id.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    p.z.to_string(),
                    a.position.x.to_string(),
                    a.position.y.to_string(),
                    a.position.z.to_string(),
                ],
            )?;
        }
    }
    finish(w, &path)?;

    let path = rel(FRONT_CSV);
    let mut w = writer(&path)?;
    row(&mut w, &path, ["x1", "x2", "f1_seconds", "f2_joules", "feasible", "knee_flag", "ee_flag"])?;
    if let Some(f) = &front {
        for p in &f.archive {
            let flag = |q: &Option<artifacts::FrontPoint>| u8::from(q.as_ref() == Some(p)).to_string();
            row(
                &mut w,
                &path,
                [
                    p.x1.to_string(),
                    p.x2.to_string(),
                    p.f1.to_string(),
                    p.f2.to_string(),
                    u8::from(p.feasible).to_string(),
                    flag(&f.knee),
                    flag(&f.energy_efficiency),
                ],
            )?;
        }
    }
    finish(w, &path)?;

    Ok(written)
}
