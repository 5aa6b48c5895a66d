//! Path loss, noise, SINR, capacity and outage for the three link families,
//! and the greedy per-node link choice.
//!
//! Attenuations are positive dB values; received power is
//! `tx / 10^(loss/10)`. The received-power threshold `p_min` and the noise
//! floor `n0` are in watts.

use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::model::{distance, elevation_cos, ChannelParams, LinkSpec, LinkTable, LinkType, Point3};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ChannelError {
    #[error("receiver lies outside the optical divergence cone")]
    OutOfBeam,
    #[error("required transmit power exceeds the link maximum")]
    Infeasible,
    #[error("no link type closes within its power bound")]
    AllInfeasible,
}

/// Evaluated link between one transmitter and one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LinkBudget {
    pub link: LinkType,
    pub distance: f64,
    /// Attenuation in dB; `+inf` when the link geometry is invalid.
    pub loss_db: f64,
    pub tx_power: f64,
    pub rx_power: f64,
    pub sinr: f64,
    /// bits/s
    pub capacity: f64,
    pub outage: f64,
    /// Whether the transmit power needed to meet the threshold is within bounds.
    pub feasible: bool,
}

impl LinkBudget {
    /// Placeholder for a link type that cannot close.
    pub fn closed(link: LinkType, distance: f64, loss_db: f64) -> Self {
        Self {
            link,
            distance,
            loss_db,
            tx_power: 0.0,
            rx_power: 0.0,
            sinr: 0.0,
            capacity: 0.0,
            outage: 1.0,
            feasible: false,
        }
    }
}

/// Optical attenuation, dB. The gain uses the standard line-of-sight form
/// with `cos θ` in the numerator, so an aligned link (`cos θ = 1`) attenuates
/// least.
pub fn pl_ul(d: f64, cos_theta: f64, p: &ChannelParams) -> Result<f64, ChannelError> {
    if cos_theta < math::cos(p.theta0) {
        return Err(ChannelError::OutOfBeam);
    }
    Ok(-math::linear_to_db(ul_gain(d, cos_theta, p)))
}

/// Optical channel gain (linear, ≤ 1 for ranges of interest).
pub fn ul_gain(d: f64, cos_theta: f64, p: &ChannelParams) -> f64 {
    p.eta_t * p.eta_r * math::exp(-p.c_lambda * d) * p.a_rec * cos_theta
        / (2.0 * PI * d * d * (1.0 - math::cos(p.theta0)))
}

/// Thorp absorption, dB/km, for `f` in kHz.
pub fn thorp_phi_db(f_khz: f64) -> f64 {
    let f2 = f_khz * f_khz;
    0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003
}

/// Acoustic attenuation, dB: spreading plus absorption.
pub fn pl_ua(d: f64, f_khz: f64, kappa: f64) -> f64 {
    kappa * 10.0 * math::log10(d) + d / 1000.0 * thorp_phi_db(f_khz)
}

/// The four ambient acoustic noise terms in dB: turbulence, shipping, wind
/// waves, thermal.
pub fn ua_noise_terms_db(f_khz: f64, s: f64, w: f64) -> [f64; 4] {
    let lf = math::log10(f_khz);
    [
        17.0 - 30.0 * lf,
        40.0 + 20.0 * (s - 0.5) + 26.0 * lf - 60.0 * math::log10(f_khz + 0.3),
        50.0 + 7.5 * math::sqrt(w) + 20.0 * lf - 40.0 * math::log10(f_khz + 0.4),
        -15.0 + 20.0 * lf,
    ]
}

/// Total ambient acoustic noise: the product of the four terms, i.e. their
/// dB sum converted once to linear.
pub fn ua_noise_total(f_khz: f64, s: f64, w: f64) -> f64 {
    math::db_to_linear(ua_noise_terms_db(f_khz, s, w).iter().sum())
}

/// Radio attenuation in a conductive medium, dB.
pub fn pl_rf(d: f64, f_hz: f64, p: &ChannelParams) -> f64 {
    8.686 * math::sqrt(PI * p.mu * f_hz * p.iota) * d
}

/// Upper-tail standard normal probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * math::erfc(x / core::f64::consts::SQRT_2)
}

/// Probability that shadowing pushes the received power below `p_min`.
pub fn outage_prob(rx_power: f64, p: &ChannelParams) -> f64 {
    let x = (math::linear_to_db(p.p_min) - math::linear_to_db(rx_power)) / p.sigma_db;
    // 1 - Q(x) == Q(-x), without cancellation in the tail.
    q_function(-x).clamp(0.0, 1.0)
}

/// Shannon capacity, bits/s.
pub fn capacity(tx_power: f64, loss_db: f64, interference: f64, spec: &LinkSpec, p: &ChannelParams) -> f64 {
    let rx = tx_power / math::db_to_linear(loss_db);
    spec.bandwidth_hz * math::log2(1.0 + rx / (p.n0 + interference))
}

/// Minimum transmit power meeting `p_min` exactly.
pub fn prop1_power(loss_db: f64, spec: &LinkSpec, p: &ChannelParams) -> Result<f64, ChannelError> {
    let power = p.p_min * math::db_to_linear(loss_db);
    if power > spec.max_power_w {
        Err(ChannelError::Infeasible)
    } else {
        Ok(power)
    }
}

/// Attenuation of `link` between two points. Zero distance gives zero loss.
pub fn path_loss(link: LinkType, a: &Point3, b: &Point3, links: &LinkTable, p: &ChannelParams) -> Result<f64, ChannelError> {
    let d = distance(a, b);
    if d == 0.0 {
        return Ok(0.0);
    }
    let spec = links.get(link);
    Ok(match link {
        LinkType::Ul => pl_ul(d, elevation_cos(a, b), p)?,
        LinkType::Ua => pl_ua(d, spec.frequency_hz / 1000.0, p.kappa),
        LinkType::Rf => pl_rf(d, spec.frequency_hz, p),
    })
}

/// Budget of `link` from `src` to `dst` at transmit power `tx`. The link is
/// feasible when `tx` meets the threshold and is within the link maximum.
pub fn budget_at_power(
    link: LinkType,
    src: &Point3,
    dst: &Point3,
    tx: f64,
    interference: f64,
    links: &LinkTable,
    p: &ChannelParams,
) -> LinkBudget {
    let d = distance(src, dst);
    let loss = match path_loss(link, src, dst, links, p) {
        Ok(l) => l.max(0.0),
        Err(_) => return LinkBudget::closed(link, d, f64::INFINITY),
    };
    let spec = links.get(link);
    let tx = tx.min(spec.max_power_w).max(0.0);
    let rx = tx / math::db_to_linear(loss);
    let required = p.p_min * math::db_to_linear(loss);
    LinkBudget {
        link,
        distance: d,
        loss_db: loss,
        tx_power: tx,
        rx_power: rx,
        sinr: rx / (p.n0 + interference),
        capacity: capacity(tx, loss, interference, spec, p),
        outage: outage_prob(rx, p),
        feasible: tx >= required && required <= spec.max_power_w,
    }
}

/// Budget of `link` under power control: the transmitter targets
/// `p_min + fade_margin_db` at the receiver. Links whose required power
/// exceeds the maximum come back closed (outage 1, capacity 0).
pub fn controlled_budget(
    link: LinkType,
    src: &Point3,
    dst: &Point3,
    interference: f64,
    links: &LinkTable,
    p: &ChannelParams,
) -> LinkBudget {
    let d = distance(src, dst);
    let loss = match path_loss(link, src, dst, links, p) {
        Ok(l) => l.max(0.0),
        Err(_) => return LinkBudget::closed(link, d, f64::INFINITY),
    };
    let spec = links.get(link);
    let tx = match prop1_power(loss + p.fade_margin_db, spec, p) {
        Ok(tx) => tx,
        Err(_) => return LinkBudget::closed(link, d, loss),
    };
    let rx = tx / math::db_to_linear(loss);
    LinkBudget {
        link,
        distance: d,
        loss_db: loss,
        tx_power: tx,
        rx_power: rx,
        sinr: rx / (p.n0 + interference),
        capacity: capacity(tx, loss, interference, spec, p),
        outage: outage_prob(rx, p),
        feasible: true,
    }
}

/// `true` when `a` should be preferred over `b`: higher capacity, then lower
/// transmit energy per bit, then the fixed order UL, RF, UA.
pub fn prefer(a: &LinkBudget, b: &LinkBudget) -> bool {
    if a.feasible != b.feasible {
        return a.feasible;
    }
    if a.capacity != b.capacity {
        return a.capacity > b.capacity;
    }
    let ea = energy_per_bit(a);
    let eb = energy_per_bit(b);
    if ea != eb {
        return ea < eb;
    }
    a.link.tie_rank() < b.link.tie_rank()
}

fn energy_per_bit(b: &LinkBudget) -> f64 {
    if b.capacity > 0.0 {
        b.tx_power / b.capacity
    } else {
        f64::INFINITY
    }
}

/// All three power-controlled budgets, in [`LinkType::ALL`] order.
pub fn all_budgets(
    src: &Point3,
    dst: &Point3,
    interference: &InterferenceState,
    links: &LinkTable,
    p: &ChannelParams,
) -> [LinkBudget; 3] {
    LinkType::ALL.map(|t| controlled_budget(t, src, dst, interference.power[t.index()], links, p))
}

/// Capacity-maximizing link under power control.
pub fn best_link(
    src: &Point3,
    dst: &Point3,
    interference: &InterferenceState,
    links: &LinkTable,
    p: &ChannelParams,
) -> Result<LinkBudget, ChannelError> {
    pick(&all_budgets(src, dst, interference, links, p))
}

/// Preferred feasible budget among candidates.
pub fn pick(budgets: &[LinkBudget]) -> Result<LinkBudget, ChannelError> {
    let mut best: Option<LinkBudget> = None;
    for b in budgets.iter().filter(|b| b.feasible) {
        if best.as_ref().map_or(true, |cur| prefer(b, cur)) {
            best = Some(*b);
        }
    }
    best.ok_or(ChannelError::AllInfeasible)
}

/// Aggregate co-channel interference seen at the USV by one node, per link
/// type, together with the contributing node sets.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct InterferenceState {
    /// Watts, indexed by [`LinkType::index`].
    pub power: [f64; 3],
    /// Contributing node ids per link type, ascending.
    pub members: [Vec<usize>; 3],
}

impl InterferenceState {
    pub fn none() -> Self {
        Self::default()
    }

    /// Interference at node `i` from every other node in `assignments`
    /// (`(node id, budget)` pairs) whose outage is within `epsilon`.
    /// Contributions are summed in ascending node id.
    pub fn at_node(i: usize, assignments: &[(usize, LinkBudget)], p: &ChannelParams) -> Self {
        let mut order: Vec<&(usize, LinkBudget)> = assignments.iter().collect();
        order.sort_by_key(|(id, _)| *id);
        let mut s = Self::default();
        for (id, b) in order {
            if *id == i || !b.feasible || b.outage > p.epsilon {
                continue;
            }
            let t = b.link.index();
            s.power[t] += b.rx_power;
            s.members[t].push(*id);
        }
        s
    }
}

/// Interference on node `i`'s own link type.
pub fn interference(i: usize, assignments: &[(usize, LinkBudget)], p: &ChannelParams) -> f64 {
    let Some((_, own)) = assignments.iter().find(|(id, _)| *id == i) else {
        return 0.0;
    };
    InterferenceState::at_node(i, assignments, p).power[own.link.index()]
}
