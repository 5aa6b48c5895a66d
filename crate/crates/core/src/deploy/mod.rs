//! AUV placement by adaptive capacity-bounded k-means, per-AUV time and
//! energy accounting, and cruise-speed selection.

pub mod cluster;
pub mod energy;

use alloc::vec::Vec;

pub use cluster::{akmc, lloyd, Akmc, Cluster, LloydRun};
pub use energy::{
    energy_buoyancy, energy_electronic, energy_linear, energy_rotation, optimal_velocity, VelocityMode,
};

use crate::channel::{self, LinkBudget};
use crate::math::{self, PI};
use crate::model::{distance, elevation_cos, LinkType, Point3, Scenario, Usv};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeployError {
    #[error("depth {0} m exceeds the maximum diving depth")]
    DepthExceeded(f64),
    #[error("velocity must be positive")]
    ZeroVelocity,
    #[error("energy budget exhausted")]
    EnergyExhausted,
    #[error("node {0} closes no link to its AUV")]
    InfeasibleLink(usize),
    #[error("{requested} clusters requested for {points} points")]
    InsufficientCapacity { requested: usize, points: usize },
    #[error("no points to cluster")]
    EmptyInput,
    #[error("cluster count and capacity must be at least 1")]
    InvalidCount,
    #[error("node {0} is not in the scenario")]
    UnknownNode(usize),
}

/// Travel time of one packet: transmission plus propagation.
pub fn transfer_time(packet_bits: f64, capacity: f64, d: f64, speed: f64) -> f64 {
    let tx = if capacity > 0.0 {
        packet_bits / capacity
    } else {
        f64::INFINITY
    };
    tx + d / speed
}

/// One member's uplink to its AUV.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MemberLink {
    pub id: usize,
    pub budget: LinkBudget,
    /// Transmit power needed to meet the received-power threshold on the
    /// chosen link (may exceed the link maximum).
    pub required_power: f64,
    /// Power shortfall: `max(0, required − transmitted)`.
    pub shortfall: f64,
}

/// Member uplink at transmit power `x2` (capped per link type): the
/// best-capacity link among those that close; if none closes, the
/// best-capacity link anyway.
pub fn member_link(s: &Scenario, id: usize, src: &Point3, auv: &Point3, x2: f64) -> MemberLink {
    let budgets = LinkType::ALL.map(|t| channel::budget_at_power(t, src, auv, x2, 0.0, &s.links, &s.channel));
    let budget = channel::pick(&budgets).unwrap_or_else(|_| {
        let mut any = budgets;
        any.iter_mut().for_each(|b| b.feasible = b.loss_db.is_finite());
        let mut b = channel::pick(&any).unwrap_or(budgets[LinkType::Ua.index()]);
        b.feasible = false;
        b
    });
    let required_power = if budget.loss_db.is_finite() {
        s.channel.p_min * math::db_to_linear(budget.loss_db)
    } else {
        f64::INFINITY
    };
    MemberLink {
        id,
        budget,
        required_power,
        shortfall: (required_power - budget.tx_power).max(0.0),
    }
}

/// Collection time and AUV-side communication energy of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub t_r: f64,
    pub e_r: f64,
    pub links: Vec<MemberLink>,
}

/// Sums transmission plus propagation time over all members at power `x2`.
/// Fails on the first member that closes no link.
pub fn time_collect(s: &Scenario, cluster: &Cluster, auv_pos: &Point3, x2: f64) -> Result<Collection, DeployError> {
    let c = collect(s, cluster, auv_pos, x2)?;
    if let Some(bad) = c.links.iter().find(|l| !l.budget.feasible) {
        return Err(DeployError::InfeasibleLink(bad.id));
    }
    Ok(c)
}

fn collect(s: &Scenario, cluster: &Cluster, auv_pos: &Point3, x2: f64) -> Result<Collection, DeployError> {
    let mut t_r = 0.0;
    let mut bits = 0.0;
    let mut links = Vec::with_capacity(cluster.members.len());
    for &id in &cluster.members {
        let n = s.usn(id).ok_or(DeployError::UnknownNode(id))?;
        let link = member_link(s, id, &n.pos, auv_pos, x2);
        let speed = s.links.get(link.budget.link).speed_mps;
        t_r += transfer_time(n.packet_size, link.budget.capacity, link.budget.distance, speed);
        bits += n.packet_size;
        links.push(link);
    }
    Ok(Collection {
        t_r,
        e_r: bits * s.energy.e_r_per_bit,
        links,
    })
}

/// Travel time back to the USV.
pub fn time_motion(auv_pos: &Point3, usv: &Usv, v: f64) -> Result<f64, DeployError> {
    if !(v > 0.0) {
        return Err(DeployError::ZeroVelocity);
    }
    Ok(distance(auv_pos, &usv.pos) / v)
}

/// Why a plan is not feasible.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum PlanIssue {
    InfeasibleLink(usize),
    EnergyExhausted,
    DepthExceeded,
}

/// Everything one AUV does.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AuvPlan {
    pub auv: usize,
    pub cluster: Cluster,
    pub velocity: f64,
    pub d_j0: f64,
    pub psi0: f64,
    pub psi1: f64,
    pub t_r: f64,
    pub t_m: f64,
    pub e_r: f64,
    pub e_b: f64,
    pub e_l: f64,
    pub e_s: f64,
    pub e_e: f64,
    pub total_energy: f64,
    pub links: Vec<MemberLink>,
    pub issues: Vec<PlanIssue>,
}

impl AuvPlan {
    pub fn time(&self) -> f64 {
        self.t_r + self.t_m
    }

    pub fn feasible(&self) -> bool {
        self.issues.is_empty()
    }

    /// Sum of member power shortfalls.
    pub fn power_violation(&self) -> f64 {
        self.links.iter().map(|l| l.shortfall).sum()
    }
}

/// Outbound heading from the USV to the AUV position and the return heading.
pub fn headings(auv: &Point3, usv: &Usv) -> (f64, f64) {
    let dx = auv.x - usv.pos.x;
    let dy = auv.y - usv.pos.y;
    if dx == 0.0 && dy == 0.0 {
        return (0.0, 0.0);
    }
    let out = math::atan2(dy, dx);
    (out, out + PI)
}

/// Builds the plan of one AUV hovering at `cluster.centroid`.
pub fn plan_for(s: &Scenario, auv: usize, cluster: Cluster, x2: f64, mode: VelocityMode) -> Result<AuvPlan, DeployError> {
    let e = &s.energy;
    let pos = cluster.centroid;
    let col = collect(s, &cluster, &pos, x2)?;
    let mut issues: Vec<PlanIssue> = col
        .links
        .iter()
        .filter(|l| !l.budget.feasible)
        .map(|l| PlanIssue::InfeasibleLink(l.id))
        .collect();

    let d_j0 = distance(&pos, &s.usv.pos);
    let cos = elevation_cos(&pos, &s.usv.pos);
    let depth = pos.depth();
    let e_b = match energy_buoyancy(depth, e) {
        Ok(v) => v,
        Err(_) => {
            issues.push(PlanIssue::DepthExceeded);
            energy_buoyancy(e.d_max, e)?
        }
    };
    let e_l = energy_linear(d_j0, cos, depth.min(e.d_max), e);
    let (psi0, psi1) = headings(&pos, &s.usv);
    let e_s = energy_rotation(psi0, psi1, e);
    let fixed = col.e_r + e_b + e_l + e_s;
    let v_max = s.auv_template.v_max;
    let velocity = match optimal_velocity(d_j0, fixed, e, v_max, s.auv_template.e_max, mode) {
        Ok(v) => v,
        Err(_) => {
            issues.push(PlanIssue::EnergyExhausted);
            v_max
        }
    };
    let e_e = energy_electronic(d_j0, velocity, e)?;
    Ok(AuvPlan {
        auv,
        cluster,
        velocity,
        d_j0,
        psi0,
        psi1,
        t_r: col.t_r,
        t_m: time_motion(&pos, &s.usv, velocity)?,
        e_r: col.e_r,
        e_b,
        e_l,
        e_s,
        e_e,
        total_energy: col.e_r + e_b + e_l + e_s + e_e,
        links: col.links,
        issues,
    })
}

/// Deployment knobs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DeployOptions {
    pub velocity_mode: VelocityMode,
    /// Overrides the scenario's per-AUV capacity.
    pub n_max: Option<usize>,
}

/// A full deployment for one `(x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Deployment {
    pub x1_requested: usize,
    /// Cluster count after capacity adaptation.
    pub x1: usize,
    pub x2: f64,
    pub plans: Vec<AuvPlan>,
}

impl Deployment {
    /// Slowest AUV.
    pub fn makespan(&self) -> f64 {
        self.plans.iter().map(AuvPlan::time).fold(0.0, f64::max)
    }

    pub fn total_energy(&self) -> f64 {
        self.plans.iter().map(|p| p.total_energy).sum()
    }

    pub fn feasible(&self) -> bool {
        self.plans.iter().all(AuvPlan::feasible)
    }
}

/// Clusters the isolated nodes `set_c` and plans one AUV per cluster.
/// Positions come from a horizontal clustering of the members, refined by a
/// second pass that minimizes member distances plus the distance to the USV.
pub fn deploy(s: &Scenario, set_c: &[usize], x1: usize, x2: f64, opts: &DeployOptions) -> Result<Deployment, DeployError> {
    if set_c.is_empty() {
        return Err(DeployError::EmptyInput);
    }
    let mut points: Vec<(usize, Point3)> = set_c
        .iter()
        .map(|&id| s.usn(id).map(|n| (id, n.pos)).ok_or(DeployError::UnknownNode(id)))
        .collect::<Result<_, _>>()?;
    points.sort_by_key(|(id, _)| *id);
    let n_max = opts.n_max.unwrap_or(s.n_max);
    let first = akmc(&points, x1, n_max, s.seed)?;
    let (clusters, _) = cluster::refine_towards(&points, &first, [s.usv.pos.x, s.usv.pos.y], n_max);
    let plans = clusters
        .into_iter()
        .enumerate()
        .map(|(j, c)| plan_for(s, j, c, x2, opts.velocity_mode))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Deployment {
        x1_requested: x1,
        x1: plans.len(),
        x2,
        plans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_scenario, ScenarioConfig, UsnNode};

    fn scenario(points: &[Point3]) -> Scenario {
        let mut s = generate_scenario(
            &ScenarioConfig {
                n_usns: 1,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        s.usns = points
            .iter()
            .enumerate()
            .map(|(id, &pos)| UsnNode {
                id,
                pos,
                packet_size: 1e6,
            })
            .collect();
        s
    }

    #[test]
    fn transfer_time_examples() {
        let t = transfer_time(1e6, 1e6, 150.0, 2.25e8);
        assert!((t - (1.0 + 150.0 / 2.25e8)).abs() < 1e-15);
        assert_eq!(transfer_time(1e6, 1e6, 1500.0, 1500.0), 2.0);
        let a = transfer_time(1e6, 3e5, 0.0, 1500.0);
        assert_eq!(transfer_time(2e6, 3e5, 0.0, 1500.0), 2.0 * a);
    }

    #[test]
    fn motion_examples() {
        let usv = Usv {
            pos: Point3::new(0.0, 0.0, 0.0),
        };
        assert_eq!(time_motion(&usv.pos, &usv, 1.0).unwrap(), 0.0);
        assert_eq!(time_motion(&Point3::new(300.0, 0.0, 0.0), &usv, 1.0).unwrap(), 300.0);
        assert_eq!(time_motion(&usv.pos, &usv, 0.0), Err(DeployError::ZeroVelocity));
    }

    #[test]
    fn single_member_hovers_at_node() {
        let s = scenario(&[Point3::new(100.0, 120.0, -30.0)]);
        let d = deploy(&s, &[0], 1, 0.01, &DeployOptions::default()).unwrap();
        assert_eq!(d.plans.len(), 1);
        let c = d.plans[0].cluster.centroid;
        assert_eq!((c.x, c.y), (100.0, 120.0));
        assert_eq!(c.z, -30.0);
    }

    #[test]
    fn coincident_nodes_share_one_auv() {
        let p = Point3::new(200.0, 200.0, -20.0);
        let s = scenario(&[p, p, p]);
        let d = deploy(&s, &[0, 1, 2], 3, 0.01, &DeployOptions::default()).unwrap();
        assert_eq!(d.plans.len(), 1);
    }

    #[test]
    fn plan_totals_recompute() {
        let s = scenario(&[
            Point3::new(100.0, 100.0, -20.0),
            Point3::new(110.0, 95.0, -25.0),
            Point3::new(105.0, 110.0, -30.0),
            Point3::new(400.0, 380.0, -60.0),
            Point3::new(390.0, 400.0, -50.0),
            Point3::new(410.0, 410.0, -55.0),
        ]);
        let ids: Vec<usize> = (0..6).collect();
        let d = deploy(&s, &ids, 2, 1.0, &DeployOptions::default()).unwrap();
        assert_eq!(d.plans.len(), 2);
        for p in &d.plans {
            assert_eq!(p.total_energy, p.e_r + p.e_b + p.e_l + p.e_s + p.e_e);
            assert!(p.velocity > 0.0 && p.velocity <= 1.0);
            let t_m = distance(&p.cluster.centroid, &s.usv.pos) / p.velocity;
            assert_eq!(p.t_m, t_m);
        }
    }
}
