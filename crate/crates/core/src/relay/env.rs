use alloc::vec::Vec;

use crate::erm::{self, ErmError, RelayOption};
use crate::model::Scenario;
use crate::rng::{self, StreamRng};

/// Observation for one (node, relay) pair: outage on UL, UA, RF followed by
/// capacity on UL, UA, RF.
pub type State = [f64; 6];

/// Relay choice problem of one node outside the relay set.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayEnv {
    pub node: usize,
    pub options: Vec<RelayOption>,
    pub epsilon: f64,
}

impl RelayEnv {
    pub fn new(s: &Scenario, node: usize, relays: &[usize]) -> Result<Self, ErmError> {
        if relays.is_empty() {
            return Err(ErmError::EmptyRelaySet);
        }
        Ok(Self {
            node,
            options: erm::relay_options(s, node, relays)?,
            epsilon: s.channel.epsilon,
        })
    }

    pub fn from_options(node: usize, options: Vec<RelayOption>, epsilon: f64) -> Self {
        Self {
            node,
            options,
            epsilon,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.options.len()
    }

    /// State observed after choosing action `a`.
    pub fn state(&self, a: usize) -> State {
        let b = &self.options[a].budgets;
        [
            b[0].outage,
            b[1].outage,
            b[2].outage,
            b[0].capacity,
            b[1].capacity,
            b[2].capacity,
        ]
    }

    pub fn reward(&self, a: usize) -> f64 {
        self.options[a].reward(self.epsilon)
    }

    pub fn relay(&self, a: usize) -> usize {
        self.options[a].relay
    }

    /// Largest reward over all actions.
    pub fn max_reward(&self) -> f64 {
        (0..self.n_actions()).map(|a| self.reward(a)).fold(0.0, f64::max)
    }
}

/// Reward of a state: the largest capacity among link types whose outage is
/// within `epsilon`.
pub fn reward(state: &State, epsilon: f64) -> f64 {
    (0..3)
        .filter(|&t| state[t] <= epsilon)
        .map(|t| state[3 + t])
        .fold(0.0, f64::max)
}

/// First index of the largest value.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// With probability `1 - ell` the greedy action, else a uniform action.
/// The flag reports whether the exploring branch was taken.
pub fn epsilon_greedy(q_values: &[f64], ell: f64, rng: &mut StreamRng) -> (usize, bool) {
    if rng::unit(rng) < ell {
        (rng::index(rng, q_values.len()), true)
    } else {
        (argmax(q_values), false)
    }
}
