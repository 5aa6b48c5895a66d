//! Time/energy Pareto search over the AUV count `x1` and the isolated nodes'
//! transmit power `x2`, by MOEA/D with Tchebycheff decomposition.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::deploy::{self, DeployOptions, Deployment, PlanIssue};
use crate::math;
use crate::model::Scenario;
use crate::rng::{self, StreamTag};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoeaError {
    #[error("no isolated nodes to serve")]
    EmptyInput,
    #[error("at least two subproblems and a non-empty neighbourhood are required")]
    InvalidConfig,
}

/// `x1` AUVs, every isolated node transmitting at `x2` watts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DecisionVector {
    pub x1: usize,
    pub x2: f64,
}

/// Makespan `f1` (s), total energy `f2` (J) and the summed constraint
/// violation. `feasible` holds exactly when the violation is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ObjectivePoint {
    pub f1: f64,
    pub f2: f64,
    pub feasible: bool,
    pub constraint_violation: f64,
}

impl ObjectivePoint {
    pub fn as_array(&self) -> [f64; 2] {
        [self.f1, self.f2]
    }
}

/// An evaluated decision. `x.x1` is the AUV count actually deployed, which
/// can exceed the request when clusters had to be split for capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Evaluation {
    pub x: DecisionVector,
    pub f: ObjectivePoint,
}

/// Minimization dominance.
pub fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Objectives and constraint violation of a deployment: power shortfall
/// summed over members, energy overrun summed over AUVs, plus depth overrun.
/// A plan issue not reflected in those sums counts one unit each.
pub fn objectives(s: &Scenario, d: &Deployment) -> ObjectivePoint {
    let e_max = s.auv_template.e_max;
    let g1: f64 = d.plans.iter().map(|p| p.power_violation()).sum();
    let g2: f64 = d.plans.iter().map(|p| (p.total_energy - e_max).max(0.0)).sum();
    let depth: f64 = d
        .plans
        .iter()
        .filter(|p| p.issues.contains(&PlanIssue::DepthExceeded))
        .map(|p| (p.cluster.centroid.depth() - s.energy.d_max).max(0.0))
        .sum();
    let mut violation = g1 + g2 + depth;
    if !(violation > 0.0) {
        violation = d.plans.iter().map(|p| p.issues.len() as f64).sum();
    }
    ObjectivePoint {
        f1: d.makespan(),
        f2: d.total_energy(),
        feasible: violation == 0.0,
        constraint_violation: violation,
    }
}

/// Clamps `x` into the box `1 ≤ x1 ≤ n`, `0 ≤ x2 ≤ x2_max`.
pub fn repair(x: DecisionVector, n: usize, x2_max: f64) -> DecisionVector {
    let x2 = if x.x2.is_nan() { 0.0 } else { x.x2.clamp(0.0, x2_max) };
    DecisionVector {
        x1: x.x1.clamp(1, n.max(1)),
        x2,
    }
}

/// Deploys `x` (after repair) on `set_c` and scores it. Deployment failures
/// come back as an infeasible point with infinite objectives.
pub fn evaluate(s: &Scenario, set_c: &[usize], x: DecisionVector, opts: &DeployOptions) -> Evaluation {
    let x = repair(x, set_c.len(), s.links.max_power());
    match deploy::deploy(s, set_c, x.x1, x.x2, opts) {
        Ok(d) => Evaluation {
            x: DecisionVector { x1: d.x1, x2: x.x2 },
            f: objectives(s, &d),
        },
        Err(_) => Evaluation {
            x,
            f: ObjectivePoint {
                f1: f64::INFINITY,
                f2: f64::INFINITY,
                feasible: false,
                constraint_violation: f64::INFINITY,
            },
        },
    }
}

/// Weighted Chebyshev distance `max_i λ_i |f_i − z_i|`.
pub fn tchebycheff(f: &[f64; 2], lambda: &[f64; 2], z: &[f64; 2]) -> f64 {
    (lambda[0] * (f[0] - z[0]).abs()).max(lambda[1] * (f[1] - z[1]).abs())
}

/// `n` evenly spaced weight pairs on the simplex, from `(0, 1)` to `(1, 0)`.
pub fn weight_vectors(n: usize) -> Vec<[f64; 2]> {
    if n == 1 {
        return alloc::vec![[0.5, 0.5]];
    }
    (0..n)
        .map(|k| {
            let a = k as f64 / (n - 1) as f64;
            [a, 1.0 - a]
        })
        .collect()
}

/// Indices of the `t` weight vectors closest to each weight vector
/// (itself included), nearest first, ties by index.
pub fn neighbourhoods(weights: &[[f64; 2]], t: usize) -> Vec<Vec<usize>> {
    let t = t.min(weights.len());
    weights
        .iter()
        .map(|w| {
            let mut idx: Vec<usize> = (0..weights.len()).collect();
            let d = |j: usize| {
                let a = weights[j][0] - w[0];
                let b = weights[j][1] - w[1];
                a * a + b * b
            };
            idx.sort_by(|&a, &b| d(a).partial_cmp(&d(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
            idx.truncate(t);
            idx
        })
        .collect()
}

/// Mutually non-dominated feasible points, sorted by `f1` then `f2`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ParetoArchive {
    pub entries: Vec<Evaluation>,
    /// Best feasible value seen per objective.
    pub z_star: [f64; 2],
    pub weights: Vec<[f64; 2]>,
}

impl ParetoArchive {
    pub fn new(weights: Vec<[f64; 2]>) -> Self {
        Self {
            entries: Vec::new(),
            z_star: [f64::INFINITY; 2],
            weights,
        }
    }

    /// Inserts a feasible point unless an entry dominates or equals it;
    /// evicts the entries it dominates. Returns whether it was inserted.
    pub fn offer(&mut self, e: Evaluation) -> bool {
        if !e.f.feasible {
            return false;
        }
        let f = e.f.as_array();
        if self.entries.iter().any(|a| {
            let g = a.f.as_array();
            dominates(&g, &f) || g == f
        }) {
            return false;
        }
        self.entries.retain(|a| !dominates(&f, &a.f.as_array()));
        let at = self
            .entries
            .partition_point(|a| (a.f.f1, a.f.f2) < (e.f.f1, e.f.f2));
        self.entries.insert(at, e);
        true
    }

    pub fn is_mutually_nondominated(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, a)| {
            self.entries.iter().enumerate().all(|(j, b)| {
                i == j || !(dominates(&a.f.as_array(), &b.f.as_array()) || a.f.as_array() == b.f.as_array())
            })
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// MOEA/D settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MoeadConfig {
    /// Number of subproblems.
    pub subproblems: usize,
    /// Neighbourhood size.
    pub neighbourhood: usize,
    pub generations: usize,
    /// Blend-crossover extension factor.
    pub blend_alpha: f64,
    /// Per-variable mutation probability.
    pub mutation_rate: f64,
    /// Mutation step for `x2` as a fraction of its range.
    pub mutation_scale: f64,
    /// When set, `x2` is snapped to the nearest of these levels.
    pub x2_levels: Option<Vec<f64>>,
    pub deploy: DeployOptions,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self {
            subproblems: 50,
            neighbourhood: 10,
            generations: 100,
            blend_alpha: 0.5,
            mutation_rate: 0.5,
            mutation_scale: 0.1,
            x2_levels: None,
            deploy: DeployOptions::default(),
        }
    }
}

/// `n` power levels `P·k/n` for `k = 1..=n`.
pub fn power_levels(n: usize, p_max: f64) -> Vec<f64> {
    (1..=n).map(|k| p_max * k as f64 / n as f64).collect()
}

fn snap(x2: f64, levels: &[f64]) -> f64 {
    let mut best = levels[0];
    for &l in levels {
        if (l - x2).abs() < (best - x2).abs() {
            best = l;
        }
    }
    best
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MoeadRun {
    pub archive: ParetoArchive,
    /// `z*` after each generation (index 0 is after initialization).
    pub z_trace: Vec<[f64; 2]>,
    /// Distinct decisions deployed.
    pub evaluations: usize,
    /// Least-violating point seen, reported when nothing was feasible.
    pub least_infeasible: Option<Evaluation>,
}

struct Evaluator<'a> {
    s: &'a Scenario,
    set_c: &'a [usize],
    opts: DeployOptions,
    cache: BTreeMap<(usize, u64), Evaluation>,
}

impl Evaluator<'_> {
    fn eval(&mut self, x: DecisionVector) -> Evaluation {
        let key = (x.x1, x.x2.to_bits());
        if let Some(e) = self.cache.get(&key) {
            return *e;
        }
        let e = evaluate(self.s, self.set_c, x, &self.opts);
        self.cache.insert(key, e);
        e
    }
}

/// Normalizes objectives by the spread of feasible values seen so far.
#[derive(Clone, Copy)]
struct Scale {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Scale {
    fn observe(&mut self, f: &ObjectivePoint) {
        if f.feasible {
            for (i, v) in f.as_array().into_iter().enumerate() {
                self.lo[i] = self.lo[i].min(v);
                self.hi[i] = self.hi[i].max(v);
            }
        }
    }

    fn span(&self, i: usize) -> f64 {
        let r = self.hi[i] - self.lo[i];
        if r > 0.0 && r.is_finite() {
            r
        } else {
            self.lo[i].abs().max(1.0)
        }
    }

    fn aggregate(&self, f: &ObjectivePoint, lambda: &[f64; 2]) -> f64 {
        let z = self.lo;
        let n = [(f.f1 - z[0]) / self.span(0), (f.f2 - z[1]) / self.span(1)];
        tchebycheff(&n, lambda, &[0.0, 0.0])
    }

    /// Whether `a` may replace `b` on subproblem `lambda`: feasible beats
    /// infeasible, infeasible points compare by violation.
    fn accepts(&self, a: &ObjectivePoint, b: &ObjectivePoint, lambda: &[f64; 2]) -> bool {
        match (a.feasible, b.feasible) {
            (true, false) => true,
            (false, true) => false,
            (false, false) => a.constraint_violation <= b.constraint_violation,
            (true, true) => self.aggregate(a, lambda) <= self.aggregate(b, lambda),
        }
    }
}

/// Runs MOEA/D on the isolated nodes `set_c`. Deterministic in `seed`.
pub fn moead_run(s: &Scenario, set_c: &[usize], cfg: &MoeadConfig, seed: u64) -> Result<MoeadRun, MoeaError> {
    if set_c.is_empty() {
        return Err(MoeaError::EmptyInput);
    }
    if cfg.subproblems < 2 || cfg.neighbourhood == 0 {
        return Err(MoeaError::InvalidConfig);
    }
    let n = set_c.len();
    let x2_max = s.links.max_power();
    let levels = cfg.x2_levels.as_deref().filter(|l| !l.is_empty());
    let decode = |g: [f64; 2]| {
        let x1 = math::round(g[0].clamp(1.0, n as f64)) as usize;
        let mut x2 = g[1].clamp(0.0, x2_max);
        if let Some(l) = levels {
            x2 = snap(x2, l);
        }
        DecisionVector { x1, x2 }
    };

    let mut rng = rng::stream(seed, StreamTag::Moead, 0);
    let weights = weight_vectors(cfg.subproblems);
    let hoods = neighbourhoods(&weights, cfg.neighbourhood);
    let mut ev = Evaluator {
        s,
        set_c,
        opts: cfg.deploy,
        cache: BTreeMap::new(),
    };
    let mut archive = ParetoArchive::new(weights.clone());
    let mut scale = Scale {
        lo: [f64::INFINITY; 2],
        hi: [f64::NEG_INFINITY; 2],
    };
    let mut least: Option<Evaluation> = None;
    let mut note = |e: &Evaluation, archive: &mut ParetoArchive, scale: &mut Scale| {
        scale.observe(&e.f);
        if e.f.feasible {
            archive.z_star = [archive.z_star[0].min(e.f.f1), archive.z_star[1].min(e.f.f2)];
            archive.offer(*e);
        } else if least.map_or(true, |l| e.f.constraint_violation < l.f.constraint_violation) {
            least = Some(*e);
        }
    };

    let mut genomes: Vec<[f64; 2]> = (0..cfg.subproblems)
        .map(|_| {
            let x1 = 1 + rng::index(&mut rng, n);
            [x1 as f64, rng::unit(&mut rng) * x2_max]
        })
        .collect();
    let mut fits: Vec<Evaluation> = Vec::with_capacity(cfg.subproblems);
    for g in &mut genomes {
        let x = decode(*g);
        *g = [x.x1 as f64, x.x2];
        let e = ev.eval(x);
        note(&e, &mut archive, &mut scale);
        fits.push(e);
    }
    let mut z_trace = alloc::vec![archive.z_star];

    for _ in 0..cfg.generations {
        for i in 0..cfg.subproblems {
            let hood = &hoods[i];
            let a = genomes[hood[rng::index(&mut rng, hood.len())]];
            let b = genomes[hood[rng::index(&mut rng, hood.len())]];
            let mut child = [0.0; 2];
            for k in 0..2 {
                let (lo, hi) = (a[k].min(b[k]), a[k].max(b[k]));
                let ext = cfg.blend_alpha * (hi - lo);
                child[k] = lo - ext + rng::unit(&mut rng) * (hi - lo + 2.0 * ext);
            }
            child[0] = math::round(child[0]);
            if rng::unit(&mut rng) < cfg.mutation_rate {
                child[0] += if rng::unit(&mut rng) < 0.5 { -1.0 } else { 1.0 };
            }
            if rng::unit(&mut rng) < cfg.mutation_rate {
                child[1] += (2.0 * rng::unit(&mut rng) - 1.0) * cfg.mutation_scale * x2_max;
            }
            let x = decode(child);
            let child = [x.x1 as f64, x.x2];
            let e = ev.eval(x);
            note(&e, &mut archive, &mut scale);
            for &j in hood {
                if scale.accepts(&e.f, &fits[j].f, &weights[j]) {
                    genomes[j] = child;
                    fits[j] = e;
                }
            }
        }
        debug_assert!(archive.is_mutually_nondominated());
        z_trace.push(archive.z_star);
    }

    Ok(MoeadRun {
        least_infeasible: if archive.is_empty() { least } else { None },
        archive,
        z_trace,
        evaluations: ev.cache.len(),
    })
}

/// Per-point balanced weights: each objective's distance from its worst
/// archived value, normalized by its range and then across objectives.
/// A degenerate range contributes 0.5.
pub fn tradeoff_weights(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    points
        .iter()
        .map(|p| {
            let mut u = [0.0; 2];
            for i in 0..2 {
                let r = hi[i] - lo[i];
                u[i] = if r > 0.0 { (hi[i] - p[i]) / r } else { 0.5 };
            }
            let sum = u[0] + u[1];
            if sum > 0.0 {
                [u[0] / sum, u[1] / sum]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

fn tie_order(a: &Evaluation, b: &Evaluation) -> Ordering {
    a.f.f1
        .total_cmp(&b.f.f1)
        .then(a.f.f2.total_cmp(&b.f.f2))
        .then(a.x.x1.cmp(&b.x.x1))
        .then(a.x.x2.total_cmp(&b.x.x2))
}

/// The entry with the highest score; ties go to the smaller `f1`.
fn best_by(entries: &[Evaluation], score: &[f64]) -> Option<Evaluation> {
    (0..entries.len())
        .min_by(|&i, &j| score[j].total_cmp(&score[i]).then(tie_order(&entries[i], &entries[j])))
        .map(|i| entries[i])
}

/// The entry whose smaller balanced weight is largest; ties go to the
/// smaller `f1`.
pub fn knee_select(entries: &[Evaluation]) -> Option<Evaluation> {
    let pts: Vec<[f64; 2]> = entries.iter().map(|e| e.f.as_array()).collect();
    let score: Vec<f64> = tradeoff_weights(&pts).iter().map(|w| w[0].min(w[1])).collect();
    best_by(entries, &score)
}

/// The entry with the least energy per second of makespan; ties go to the
/// smaller `f1`.
pub fn energy_efficiency_select(entries: &[Evaluation]) -> Option<Evaluation> {
    let score: Vec<f64> = entries.iter().map(|e| -(e.f.f2 / e.f.f1)).collect();
    best_by(entries, &score)
}

/// Feasible, mutually non-dominated subset, one entry per objective
/// vector, sorted by `f1` then `f2`.
pub fn pareto_filter(points: &[Evaluation]) -> Vec<Evaluation> {
    let mut a = ParetoArchive::new(Vec::new());
    let mut sorted: Vec<Evaluation> = points.iter().filter(|e| e.f.feasible).copied().collect();
    sorted.sort_by(tie_order);
    for e in sorted {
        a.offer(e);
    }
    a.entries
}

/// Every `(x1, x2)` with `x1 ∈ 1..=|C|` and `x2` from `levels`, in
/// row-major order.
pub fn grid_evaluations(s: &Scenario, set_c: &[usize], levels: &[f64], opts: &DeployOptions) -> Vec<Evaluation> {
    let mut out = Vec::with_capacity(set_c.len() * levels.len());
    for x1 in 1..=set_c.len() {
        for &x2 in levels {
            out.push(evaluate(s, set_c, DecisionVector { x1, x2 }, opts));
        }
    }
    out
}

/// Exact front over the grid.
pub fn brute_force_pareto(s: &Scenario, set_c: &[usize], levels: &[f64], opts: &DeployOptions) -> Vec<Evaluation> {
    pareto_filter(&grid_evaluations(s, set_c, levels, opts))
}

/// Area dominated by `points` and bounded by `reference` (minimization).
pub fn hypervolume(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut p: Vec<[f64; 2]> = points
        .iter()
        .filter(|q| q[0] < reference[0] && q[1] < reference[1])
        .copied()
        .collect();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut hv = 0.0;
    let mut ceiling = reference[1];
    for q in p {
        if q[1] < ceiling {
            hv += (reference[0] - q[0]) * (ceiling - q[1]);
            ceiling = q[1];
        }
    }
    hv
}

/// Reference point for comparing fronts: the joint worst values pushed out
/// by a tenth of the joint range.
pub fn hypervolume_reference(fronts: &[&[[f64; 2]]]) -> [f64; 2] {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in fronts.iter().flat_map(|f| f.iter()) {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let mut r = [0.0; 2];
    for i in 0..2 {
        let span = hi[i] - lo[i];
        let pad = if span > 0.0 { span } else { hi[i].abs().max(1.0) };
        r[i] = hi[i] + 0.1 * pad;
    }
    r
}
