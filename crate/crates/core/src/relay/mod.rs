//! Relay selection for nodes outside the relay set: tabular Q-learning,
//! Sarsa, and a small neural Q-approximator with replay.
//!
//! The environment is static: choosing relay `k` yields the state and reward
//! of the pair `(i, k)` regardless of history, so every learner is solving an
//! |A|-armed selection.

pub mod dqn;
pub mod env;
pub mod tabular;

use alloc::vec::Vec;

pub use dqn::{train_dqn, DqnError, DqnHyper, QNet, ReplayBuffer, Transition};
pub use env::{epsilon_greedy, reward, RelayEnv, State};
pub use tabular::{q_update, sarsa_update, train_qlearning, train_sarsa, QTable, TabularHyper};

use crate::erm::{Detection, ErmError};
use crate::model::Scenario;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Learner identity. The declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    QLearning,
    Sarsa,
    Dqn,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::QLearning, Method::Sarsa, Method::Dqn];

    pub fn name(self) -> &'static str {
        match self {
            Method::QLearning => "qlearning",
            Method::Sarsa => "sarsa",
            Method::Dqn => "dqn",
        }
    }

    pub fn is_tabular(self) -> bool {
        !matches!(self, Method::Dqn)
    }
}

/// A learner's pick and the reward it attains.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RelayChoice {
    pub relay: usize,
    /// Index into the environment's relay options.
    pub action: usize,
    /// bits/s
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EpisodeRecord {
    pub episode: usize,
    pub mean_reward: f64,
    /// Greedy relay at the end of the episode.
    pub relay: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub choice: RelayChoice,
    pub trace: Vec<EpisodeRecord>,
}

/// Highest reward wins; ties go to the earliest method in [`Method::ALL`]
/// order, so tabular results beat the neural one. `results` must be non-empty.
pub fn select_best(results: &[(Method, RelayChoice)]) -> (Method, RelayChoice) {
    let mut best = results[0];
    for &(m, c) in &results[1..] {
        if c.reward > best.1.reward || (c.reward == best.1.reward && m < best.0) {
            best = (m, c);
        }
    }
    best
}

/// Baseline: the geometrically nearest relay (lowest id on ties).
pub fn nearest_relay(env: &RelayEnv) -> RelayChoice {
    let mut a = 0;
    for (i, o) in env.options.iter().enumerate().skip(1) {
        let cur = &env.options[a];
        let closer = o.best.distance < cur.best.distance
            || (o.best.distance == cur.best.distance && o.relay < cur.relay);
        if closer {
            a = i;
        }
    }
    RelayChoice {
        relay: env.relay(a),
        action: a,
        reward: env.reward(a),
    }
}

/// Learner settings for a selection run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RelayConfig {
    pub qlearning: bool,
    pub sarsa: bool,
    pub dqn: bool,
    pub tabular: TabularHyper,
    pub neural: DqnHyper,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            qlearning: true,
            sarsa: true,
            dqn: true,
            tabular: TabularHyper::default(),
            neural: DqnHyper::default(),
        }
    }
}

impl RelayConfig {
    pub fn enabled(&self) -> Vec<Method> {
        Method::ALL
            .into_iter()
            .filter(|m| match m {
                Method::QLearning => self.qlearning,
                Method::Sarsa => self.sarsa,
                Method::Dqn => self.dqn,
            })
            .collect()
    }
}

/// Everything learned for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSelection {
    pub node: usize,
    /// Per enabled method, in [`Method::ALL`] order.
    pub results: Vec<(Method, RelayChoice)>,
    pub best: (Method, RelayChoice),
    pub baseline: RelayChoice,
    /// Largest reward over all relays.
    pub optimum: f64,
    /// Set when the neural learner diverged and the tabular result stood in.
    pub dqn_fallback: bool,
    pub traces: Vec<(Method, Vec<EpisodeRecord>)>,
}

/// Trains every enabled learner for one node. Falls back to Q-learning
/// (trained on demand if disabled) when the neural learner diverges.
pub fn select_for_node(env: &RelayEnv, cfg: &RelayConfig, seed: u64) -> NodeSelection {
    let methods = cfg.enabled();
    let mut results = Vec::new();
    let mut traces = Vec::new();
    let mut fallback = false;
    for &m in &methods {
        let out = match m {
            Method::QLearning => train_qlearning(env, &cfg.tabular, seed),
            Method::Sarsa => train_sarsa(env, &cfg.tabular, seed),
            Method::Dqn => match train_dqn(env, &cfg.neural, seed) {
                Ok(r) => r,
                Err(DqnError::DivergedParameters) => {
                    fallback = true;
                    let tab = train_qlearning(env, &cfg.tabular, seed);
                    TrainResult {
                        choice: tab.choice,
                        trace: Vec::new(),
                    }
                }
            },
        };
        results.push((m, out.choice));
        traces.push((m, out.trace));
    }
    let best = if results.is_empty() {
        let c = nearest_relay(env);
        (Method::QLearning, c)
    } else {
        select_best(&results)
    };
    NodeSelection {
        node: env.node,
        results,
        best,
        baseline: nearest_relay(env),
        optimum: env.max_reward(),
        dqn_fallback: fallback,
        traces,
    }
}

/// Runs relay selection for every node outside the relay set, ascending id.
pub fn select_relays(s: &Scenario, detection: &Detection, cfg: &RelayConfig) -> Result<Vec<NodeSelection>, ErmError> {
    if detection.relays.is_empty() {
        return Ok(Vec::new());
    }
    let mut ids: Vec<usize> = s.usns.iter().map(|n| n.id).filter(|id| !detection.is_relay(*id)).collect();
    ids.sort_unstable();
    ids.into_iter()
        .map(|i| {
            let env = RelayEnv::new(s, i, &detection.relays)?;
            Ok(select_for_node(&env, cfg, s.seed))
        })
        .collect()
}

/// `(node, relay)` pairs for the partition step.
pub fn choices(selections: &[NodeSelection]) -> Vec<(usize, usize)> {
    selections.iter().map(|n| (n.node, n.best.1.relay)).collect()
}
