//! Relay detection and the three-way response-mode partition.
//!
//! Mode 1 (set A): the node reaches the USV directly and serves as a relay.
//! Mode 2 (set B): one hop through a relay. Mode 3 (set C): isolated, served
//! by an AUV.

use alloc::vec::Vec;

use crate::channel::{self, InterferenceState, LinkBudget};
use crate::model::{LinkType, Scenario};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ErmError {
    #[error("relay set is empty")]
    EmptyRelaySet,
    #[error("node {0} is not in the scenario")]
    UnknownNode(usize),
    #[error("no relay choice supplied for node {0}")]
    MissingChoice(usize),
    #[error("node {node} chose {relay}, which is not a relay")]
    NotARelay { node: usize, relay: usize },
}

/// Outcome of relay detection: every node's final link to the USV and the
/// ids that pass both gates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Detection {
    /// Ascending relay ids.
    pub relays: Vec<usize>,
    /// `(node id, link to the USV)` for every node, ascending id.
    pub budgets: Vec<(usize, LinkBudget)>,
}

impl Detection {
    pub fn budget(&self, id: usize) -> Option<&LinkBudget> {
        self.budgets.iter().find(|(i, _)| *i == id).map(|(_, b)| b)
    }

    pub fn is_relay(&self, id: usize) -> bool {
        self.relays.binary_search(&id).is_ok()
    }
}

fn best_or_closed(budgets: &[LinkBudget; 3]) -> LinkBudget {
    channel::pick(budgets).unwrap_or_else(|_| {
        let ua = budgets[LinkType::Ua.index()];
        LinkBudget::closed(LinkType::Ua, ua.distance, ua.loss_db)
    })
}

/// Nodes that reach the USV with outage ≤ ε and SINR ≥ γ under power
/// control. Every node first picks its best link without interference; each
/// sweep then recomputes all choices against the co-channel interference of
/// the previous assignment.
pub fn detect_relays(s: &Scenario) -> Detection {
    let p = &s.channel;
    let usv = s.usv.pos;
    let mut nodes: Vec<_> = s.usns.iter().collect();
    nodes.sort_by_key(|n| n.id);

    let none = InterferenceState::none();
    let mut budgets: Vec<(usize, LinkBudget)> = nodes
        .iter()
        .map(|n| (n.id, best_or_closed(&channel::all_budgets(&n.pos, &usv, &none, &s.links, p))))
        .collect();

    for _ in 0..p.interference_sweeps.max(1) {
        budgets = nodes
            .iter()
            .map(|n| {
                let state = InterferenceState::at_node(n.id, &budgets, p);
                (n.id, best_or_closed(&channel::all_budgets(&n.pos, &usv, &state, &s.links, p)))
            })
            .collect();
    }

    let relays = budgets
        .iter()
        .filter(|(_, b)| b.feasible && b.outage <= p.epsilon && b.sinr >= p.gamma)
        .map(|(id, _)| *id)
        .collect();
    Detection { relays, budgets }
}

/// Links from one node to one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RelayOption {
    pub relay: usize,
    /// Power-controlled budgets in UL, UA, RF order, without interference.
    pub budgets: [LinkBudget; 3],
    /// Preferred link, or a closed placeholder when nothing closes.
    pub best: LinkBudget,
}

impl RelayOption {
    /// Largest capacity over link types that pass the outage gate.
    pub fn reward(&self, epsilon: f64) -> f64 {
        self.budgets
            .iter()
            .filter(|b| b.outage <= epsilon)
            .map(|b| b.capacity)
            .fold(0.0, f64::max)
    }
}

/// Options for node `i` towards every relay, in the order of `relays`.
pub fn relay_options(s: &Scenario, i: usize, relays: &[usize]) -> Result<Vec<RelayOption>, ErmError> {
    let src = s.usn(i).ok_or(ErmError::UnknownNode(i))?.pos;
    let none = InterferenceState::none();
    relays
        .iter()
        .map(|&k| {
            let dst = s.usn(k).ok_or(ErmError::UnknownNode(k))?.pos;
            let budgets = channel::all_budgets(&src, &dst, &none, &s.links, &s.channel);
            Ok(RelayOption {
                relay: k,
                budgets,
                best: best_or_closed(&budgets),
            })
        })
        .collect()
}

/// Mean best-link capacity from a node to all relays.
pub fn mean_capacity_threshold(options: &[RelayOption]) -> Result<f64, ErmError> {
    if options.is_empty() {
        return Err(ErmError::EmptyRelaySet);
    }
    Ok(options.iter().map(|o| o.best.capacity).sum::<f64>() / options.len() as f64)
}

/// A mode-2 node with its relay.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RelayedNode {
    pub id: usize,
    pub relay: usize,
    pub budget: LinkBudget,
    /// Mean capacity over all relays that the chosen link had to beat.
    pub threshold: f64,
}

/// The partition of all nodes into the three modes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ErmAssignment {
    pub set_a: Vec<usize>,
    pub set_b: Vec<RelayedNode>,
    pub set_c: Vec<usize>,
}

impl ErmAssignment {
    pub fn len(&self) -> usize {
        self.set_a.len() + self.set_b.len() + self.set_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Gate for mode 2: the chosen relay's best link has outage ≤ ε and capacity
/// strictly above the mean over all relays.
pub fn passes_gate(option: &RelayOption, threshold: f64, epsilon: f64) -> bool {
    option.best.feasible && option.best.outage <= epsilon && option.best.capacity > threshold
}

/// Assigns every non-relay node to mode 2 or 3 given its chosen relay.
/// `choices` maps node id to relay id; it must cover every non-relay node
/// whenever the relay set is non-empty.
pub fn partition_erm(s: &Scenario, relays: &[usize], choices: &[(usize, usize)]) -> Result<ErmAssignment, ErmError> {
    let mut ids: Vec<usize> = s.usns.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    let mut set_a: Vec<usize> = relays.to_vec();
    set_a.sort_unstable();
    let mut set_b = Vec::new();
    let mut set_c = Vec::new();

    for &i in &ids {
        if set_a.binary_search(&i).is_ok() {
            continue;
        }
        if set_a.is_empty() {
            set_c.push(i);
            continue;
        }
        let &(_, k) = choices.iter().find(|(n, _)| *n == i).ok_or(ErmError::MissingChoice(i))?;
        let idx = set_a
            .iter()
            .position(|&r| r == k)
            .ok_or(ErmError::NotARelay { node: i, relay: k })?;
        let options = relay_options(s, i, &set_a)?;
        let threshold = mean_capacity_threshold(&options)?;
        let chosen = &options[idx];
        if passes_gate(chosen, threshold, s.channel.epsilon) {
            set_b.push(RelayedNode {
                id: i,
                relay: k,
                budget: chosen.best,
                threshold,
            });
        } else {
            set_c.push(i);
        }
    }
    Ok(ErmAssignment { set_a, set_b, set_c })
}
