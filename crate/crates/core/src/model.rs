//! Domain types, default parameter tables, scenario generation and validation.
//!
//! Depth is stored as non-positive `z` (sea surface at `z = 0`). Powers are
//! watts everywhere in this module.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::rng::{self, StreamTag};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// A position in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Distance ignoring depth.
    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        math::sqrt(dx * dx + dy * dy)
    }

    /// Absolute depth below the surface.
    pub fn depth(&self) -> f64 {
        self.z.abs()
    }
}

/// Euclidean distance.
pub fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    math::sqrt(dx * dx + dy * dy + dz * dz)
}

/// Cosine of the elevation angle of the segment `a -> b` (1 when level,
/// 0 when vertical). Coincident points count as level.
pub fn elevation_cos(a: &Point3, b: &Point3) -> f64 {
    let d = distance(a, b);
    if d == 0.0 {
        1.0
    } else {
        (a.horizontal_distance(b) / d).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct UsnNode {
    pub id: usize,
    pub pos: Point3,
    /// Packet size in bits.
    pub packet_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AuvNode {
    pub id: usize,
    pub pos: Point3,
    /// Maximum speed, m/s.
    pub v_max: f64,
    /// Energy budget, joules.
    pub e_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Usv {
    pub pos: Point3,
}

/// Underwater communication link family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LinkType {
    /// Optical.
    Ul,
    /// Acoustic.
    Ua,
    /// Radio.
    Rf,
}

impl LinkType {
    /// Canonical order used for state vectors: UL, UA, RF.
    pub const ALL: [LinkType; 3] = [LinkType::Ul, LinkType::Ua, LinkType::Rf];

    /// Preference when capacity and energy tie (lower is preferred).
    pub fn tie_rank(self) -> u8 {
        match self {
            LinkType::Ul => 0,
            LinkType::Rf => 1,
            LinkType::Ua => 2,
        }
    }

    pub fn index(self) -> usize {
        match self {
            LinkType::Ul => 0,
            LinkType::Ua => 1,
            LinkType::Rf => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkType::Ul => "UL",
            LinkType::Ua => "UA",
            LinkType::Rf => "RF",
        }
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical-layer constants of one link family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct LinkSpec {
    pub frequency_hz: f64,
    pub max_power_w: f64,
    /// Propagation speed, m/s.
    pub speed_mps: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LinkTable {
    pub ul: LinkSpec,
    pub ua: LinkSpec,
    pub rf: LinkSpec,
}

impl LinkTable {
    pub fn get(&self, link: LinkType) -> &LinkSpec {
        match link {
            LinkType::Ul => &self.ul,
            LinkType::Ua => &self.ua,
            LinkType::Rf => &self.rf,
        }
    }

    /// Largest transmit power over all families.
    pub fn max_power(&self) -> f64 {
        self.ul.max_power_w.max(self.ua.max_power_w).max(self.rf.max_power_w)
    }
}

impl Default for LinkTable {
    fn default() -> Self {
        Self {
            ul: LinkSpec {
                frequency_hz: 1e13,
                max_power_w: 0.010,
                speed_mps: 2.25e8,
                bandwidth_hz: 1e8,
            },
            ua: LinkSpec {
                frequency_hz: 2e4,
                max_power_w: 5.0,
                speed_mps: 1500.0,
                bandwidth_hz: 5e3,
            },
            rf: LinkSpec {
                frequency_hz: 5e6,
                max_power_w: 5.0,
                speed_mps: 2.25e8,
                bandwidth_hz: 1e6,
            },
        }
    }
}

/// Channel, noise and threshold parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChannelParams {
    pub eta_t: f64,
    pub eta_r: f64,
    /// Extinction coefficient c(λ) = a(λ) + b(λ), 1/m.
    pub c_lambda: f64,
    /// Receiver aperture, m².
    pub a_rec: f64,
    /// Beam divergence half-angle, radians.
    pub theta0: f64,
    /// Acoustic spreading coefficient.
    pub kappa: f64,
    /// Shipping activity factor.
    pub s: f64,
    /// Wind speed, m/s.
    pub w: f64,
    /// Permeability, H/m.
    pub mu: f64,
    /// Conductivity, S/m.
    pub iota: f64,
    /// Noise power, W.
    pub n0: f64,
    /// Log-normal shadowing standard deviation, dB.
    pub sigma_db: f64,
    /// Received-power threshold, W.
    pub p_min: f64,
    /// Margin above `p_min` targeted by the power-control rule, dB.
    pub fade_margin_db: f64,
    /// Outage threshold.
    pub epsilon: f64,
    /// SINR threshold (linear).
    pub gamma: f64,
    /// Number of interference sweeps during relay detection.
    pub interference_sweeps: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            eta_t: 0.9,
            eta_r: 0.9,
            c_lambda: 0.1514,
            a_rec: 0.01,
            theta0: 68.0_f64.to_radians(),
            kappa: 1.5,
            s: 0.5,
            w: 0.5,
            mu: 1.256e-6,
            iota: 0.01,
            n0: math::dbm_to_watts(-130.0),
            sigma_db: 4.0,
            // 5 dB above the noise floor.
            p_min: math::dbm_to_watts(-125.0),
            fade_margin_db: 10.0,
            epsilon: 0.01,
            gamma: 0.1,
            interference_sweeps: 1,
        }
    }
}

/// AUV energy model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnergyParams {
    /// Seawater density, kg/m³.
    pub rho: f64,
    pub eta_b: f64,
    pub eta_l: f64,
    pub eta_s: f64,
    /// Net buoyancy mass, kg.
    pub m_b: f64,
    /// Movable block mass, kg.
    pub m_l: f64,
    pub g: f64,
    /// Maximum depth, m.
    pub d_max: f64,
    /// Atmospheric pressure, Pa.
    pub p0: f64,
    pub a_l: f64,
    pub a_s: f64,
    pub a_e: f64,
    /// AUV-side communication energy per received bit, J/bit.
    pub e_r_per_bit: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            rho: 1027.0,
            eta_b: 0.7,
            eta_l: 0.85,
            eta_s: 0.85,
            m_b: 0.494,
            m_l: 11.0,
            g: 9.8,
            d_max: 200.0,
            p0: 101_325.0,
            a_l: 0.1,
            a_s: 1.0,
            a_e: 1.5,
            e_r_per_bit: 1e-7,
        }
    }
}

/// Deployment box: `x ∈ [0, x]`, `y ∈ [0, y]`, `z ∈ [-depth, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Area {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

impl Default for Area {
    fn default() -> Self {
        Self {
            x: 500.0,
            y: 500.0,
            depth: 200.0,
        }
    }
}

/// Full world state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scenario {
    pub usns: Vec<UsnNode>,
    pub auv_template: AuvNode,
    pub usv: Usv,
    pub links: LinkTable,
    pub channel: ChannelParams,
    pub energy: EnergyParams,
    pub seed: u64,
    /// Maximum number of IUSNs one AUV serves.
    pub n_max: usize,
    pub area: Area,
}

impl Scenario {
    pub fn usn(&self, id: usize) -> Option<&UsnNode> {
        self.usns.iter().find(|n| n.id == id)
    }
}

/// Inputs to [`generate_scenario`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub n_usns: usize,
    pub area: Area,
    /// USV horizontal position; defaults to the box centre.
    pub usv_xy: Option<(f64, f64)>,
    pub packet_size_bits: f64,
    pub n_max: usize,
    pub v_max: f64,
    pub e_max: f64,
    pub links: LinkTable,
    pub channel: ChannelParams,
    pub energy: EnergyParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_usns: 100,
            area: Area::default(),
            usv_xy: None,
            packet_size_bits: 1e6,
            n_max: 20,
            v_max: 1.0,
            e_max: 2.0e9,
            links: LinkTable::default(),
            channel: ChannelParams::default(),
            energy: EnergyParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
}

/// Draws USN positions uniformly in the box, `z ∈ [-depth, 0)`.
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario, ModelError> {
    let a = config.area;
    if !(a.x > 0.0 && a.y > 0.0 && a.depth > 0.0) {
        return Err(ModelError::InvalidConfig(format!(
            "box dimensions must be positive, got {} x {} x {}",
            a.x, a.y, a.depth
        )));
    }
    if config.n_usns == 0 {
        return Err(ModelError::InvalidConfig("node count must be at least 1".into()));
    }
    if !(config.packet_size_bits > 0.0) {
        return Err(ModelError::InvalidConfig("packet size must be positive".into()));
    }
    if config.n_max == 0 {
        return Err(ModelError::InvalidConfig("n_max must be at least 1".into()));
    }

    let mut r = rng::stream(seed, StreamTag::Scenario, 0);
    let usns = (0..config.n_usns)
        .map(|id| {
            let x = rng::unit(&mut r) * a.x;
            let y = rng::unit(&mut r) * a.y;
            let z = -a.depth + rng::unit(&mut r) * a.depth;
            UsnNode {
                id,
                pos: Point3::new(x, y, z),
                packet_size: config.packet_size_bits,
            }
        })
        .collect();

    let (ux, uy) = config.usv_xy.unwrap_or((a.x / 2.0, a.y / 2.0));
    let usv = Usv {
        pos: Point3::new(ux, uy, 0.0),
    };
    Ok(Scenario {
        usns,
        auv_template: AuvNode {
            id: 0,
            pos: usv.pos,
            v_max: config.v_max,
            e_max: config.e_max,
        },
        usv,
        links: config.links,
        channel: config.channel,
        energy: config.energy,
        seed,
        n_max: config.n_max,
        area: a,
    })
}

/// One broken invariant: which field and which bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub bound: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.bound)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn check(&mut self, ok: bool, field: impl Into<String>, bound: &str) {
        if !ok {
            self.0.push(Violation {
                field: field.into(),
                bound: bound.into(),
            });
        }
    }

    fn positive(&mut self, v: f64, field: &str) {
        self.check(v > 0.0 && v.is_finite(), field, "must be > 0");
    }

    fn efficiency(&mut self, v: f64, field: &str) {
        self.check(v > 0.0 && v <= 1.0, field, "must lie in (0, 1]");
    }
}

/// Returns every violated invariant; empty iff the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut c = Checker(Vec::new());

    c.check(!s.usns.is_empty(), "usns", "at least one USN required");
    c.check(s.n_max >= 1, "run.n_max", "must be >= 1");
    c.positive(s.area.x, "run.area_x");
    c.positive(s.area.y, "run.area_y");
    c.positive(s.area.depth, "run.depth");

    for (i, n) in s.usns.iter().enumerate() {
        if s.usns[..i].iter().any(|m| m.id == n.id) {
            c.check(false, format!("usns[{i}].id"), "ids must be unique");
        }
        c.check(
            n.packet_size > 0.0 && n.packet_size.is_finite(),
            format!("usns[{i}].packet_size"),
            "must be > 0",
        );
        let p = n.pos;
        c.check(p.x.is_finite() && p.y.is_finite(), format!("usns[{i}].pos"), "x, y must be finite");
        c.check(
            p.z.is_finite() && p.z <= 0.0 && p.z >= -s.energy.d_max,
            format!("usns[{i}].z"),
            "z must lie in [-D_max, 0]",
        );
        c.check(
            p.x >= 0.0 && p.x <= s.area.x && p.y >= 0.0 && p.y <= s.area.y && p.z >= -s.area.depth,
            format!("usns[{i}].pos"),
            "must lie within the configured box",
        );
    }

    c.check(s.usv.pos.z == 0.0, "usv.z", "must be exactly 0");
    c.check(
        s.usv.pos.x.is_finite() && s.usv.pos.y.is_finite(),
        "usv.pos",
        "x, y must be finite",
    );
    c.positive(s.auv_template.v_max, "auv.v_max");
    c.positive(s.auv_template.e_max, "auv.e_max");

    for link in LinkType::ALL {
        let spec = s.links.get(link);
        let name = link.name();
        c.positive(spec.frequency_hz, &format!("links.{name}.frequency_hz"));
        c.positive(spec.max_power_w, &format!("links.{name}.max_power_w"));
        c.positive(spec.bandwidth_hz, &format!("links.{name}.bandwidth_hz"));
        let expected = match link {
            LinkType::Ua => 1500.0,
            _ => 2.25e8,
        };
        c.check(
            spec.speed_mps == expected,
            format!("links.{name}.speed_mps"),
            if link == LinkType::Ua {
                "must equal 1500 m/s"
            } else {
                "must equal 2.25e8 m/s"
            },
        );
    }

    let ch = &s.channel;
    c.efficiency(ch.eta_t, "channel.eta_t");
    c.efficiency(ch.eta_r, "channel.eta_r");
    c.positive(ch.c_lambda, "channel.c_lambda");
    c.positive(ch.a_rec, "channel.a_rec");
    c.check(
        ch.theta0 > 0.0 && ch.theta0 < core::f64::consts::FRAC_PI_2,
        "channel.theta0",
        "must lie in (0, π/2)",
    );
    c.check((1.0..=2.0).contains(&ch.kappa), "channel.kappa", "κ ∈ [1,2]");
    c.check((0.0..=1.0).contains(&ch.s), "channel.s", "s ∈ [0,1]");
    c.check(ch.w >= 0.0 && ch.w.is_finite(), "channel.w", "must be >= 0");
    c.positive(ch.mu, "channel.mu");
    c.positive(ch.iota, "channel.iota");
    c.positive(ch.n0, "channel.n0");
    c.positive(ch.sigma_db, "channel.sigma_db");
    c.positive(ch.p_min, "channel.p_min");
    c.check(
        ch.fade_margin_db >= 0.0 && ch.fade_margin_db.is_finite(),
        "channel.fade_margin_db",
        "must be >= 0",
    );
    c.check(ch.epsilon > 0.0 && ch.epsilon < 1.0, "channel.epsilon", "ε ∈ (0,1)");
    c.positive(ch.gamma, "channel.gamma");
    c.check(ch.interference_sweeps >= 1, "channel.interference_sweeps", "must be >= 1");

    let e = &s.energy;
    c.positive(e.rho, "energy.rho");
    c.efficiency(e.eta_b, "energy.eta_b");
    c.efficiency(e.eta_l, "energy.eta_l");
    c.efficiency(e.eta_s, "energy.eta_s");
    c.positive(e.m_b, "energy.m_b");
    c.positive(e.m_l, "energy.m_l");
    c.positive(e.g, "energy.g");
    c.positive(e.d_max, "energy.d_max");
    c.positive(e.p0, "energy.p0");
    c.positive(e.a_l, "energy.a_l");
    c.positive(e.a_s, "energy.a_s");
    c.positive(e.a_e, "energy.a_e");
    c.positive(e.e_r_per_bit, "energy.e_r_per_bit");

    c.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let o = Point3::default();
        assert_eq!(distance(&o, &o), 0.0);
        assert_eq!(distance(&Point3::new(3.0, 4.0, 0.0), &o), 5.0);
        assert_eq!(distance(&Point3::new(1.0, 2.0, -2.0), &o), 3.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = generate_scenario(&cfg, 7).unwrap();
        let b = generate_scenario(&cfg, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&cfg, 8).unwrap();
        assert_ne!(a.usns, c.usns);
    }

    #[test]
    fn defaults_follow_parameter_table() {
        let s = generate_scenario(&ScenarioConfig::default(), 1).unwrap();
        assert_eq!(s.channel.c_lambda, 0.1514);
        assert_eq!(s.channel.eta_t, 0.9);
        assert_eq!(s.energy.m_b, 0.494);
        assert_eq!(s.auv_template.v_max, 1.0);
        assert!((math::watts_to_dbm(s.channel.n0) + 130.0).abs() < 1e-9);
        assert_eq!(s.usns.len(), 100);
        assert_eq!(s.usv.pos, Point3::new(250.0, 250.0, 0.0));
        for n in &s.usns {
            assert!(n.pos.z < 0.0 && n.pos.z >= -200.0);
            assert!(n.pos.x >= 0.0 && n.pos.x < 500.0);
        }
    }

    #[test]
    fn node_below_usv_distance_is_depth() {
        let cfg = ScenarioConfig {
            n_usns: 1,
            ..Default::default()
        };
        let mut s = generate_scenario(&cfg, 3).unwrap();
        s.usns[0].pos = Point3::new(250.0, 250.0, -42.0);
        assert_eq!(distance(&s.usns[0].pos, &s.usv.pos), 42.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let zero = ScenarioConfig {
            n_usns: 0,
            ..Default::default()
        };
        assert!(generate_scenario(&zero, 1).is_err());
        let flat = ScenarioConfig {
            area: Area {
                x: 100.0,
                y: 0.0,
                depth: 10.0,
            },
            ..Default::default()
        };
        assert!(generate_scenario(&flat, 1).is_err());
    }

    #[test]
    fn validation_reports_named_fields() {
        let s = generate_scenario(&ScenarioConfig::default(), 5).unwrap();
        assert!(validate_scenario(&s).is_empty());

        let mut above = s.clone();
        above.usns[3].pos.z = 5.0;
        let v = validate_scenario(&above);
        assert!(v.iter().any(|v| v.field == "usns[3].z" && v.bound.contains("[-D_max, 0]")));

        let mut kappa = s.clone();
        kappa.channel.kappa = 3.0;
        let v = validate_scenario(&kappa);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "channel.kappa");
        assert!(v[0].bound.contains("κ ∈ [1,2]"));
    }
}
