use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::env::{argmax, epsilon_greedy, RelayEnv, State};
use super::{EpisodeRecord, RelayChoice, TrainResult};
use crate::math;
use crate::rng::{self, StreamTag};

/// Discretized state: one outage flag and one capacity bin per link type.
pub type StateKey = [u8; 6];

/// Number of log-spaced capacity bins.
pub const CAPACITY_BINS: u8 = 8;
const CAPACITY_LOG_LO: f64 = 3.0;
const CAPACITY_LOG_HI: f64 = 9.0;

/// Bins a state: outage `≤ ε` → 0 else 1; capacity into 8 log-spaced bins over
/// `[1e3, 1e9]` b/s (values outside saturate).
pub fn discretize(state: &State, epsilon: f64) -> StateKey {
    let mut key = [0u8; 6];
    for t in 0..3 {
        key[t] = u8::from(state[t] > epsilon);
        let c = state[3 + t];
        key[3 + t] = if c <= 0.0 {
            0
        } else {
            let span = CAPACITY_LOG_HI - CAPACITY_LOG_LO;
            let x = (math::log10(c) - CAPACITY_LOG_LO) / span * f64::from(CAPACITY_BINS);
            x.clamp(0.0, f64::from(CAPACITY_BINS - 1)) as u8
        };
    }
    key
}

/// Hyperparameters shared by Q-learning and Sarsa.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TabularHyper {
    /// Learning rate α ∈ (0, 1].
    pub alpha: f64,
    /// Discount β ∈ [0, 1).
    pub beta: f64,
    /// Exploration rate ℓ ∈ [0, 1).
    pub ell: f64,
    /// Episodes L.
    pub episodes: usize,
    /// Steps per episode T.
    pub epochs: usize,
}

impl Default for TabularHyper {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.9,
            ell: 0.1,
            episodes: 500,
            epochs: 50,
        }
    }
}

/// `(1 - α) q + α (r + β max_next)`.
pub fn q_update(q: f64, r: f64, max_next: f64, alpha: f64, beta: f64) -> f64 {
    (1.0 - alpha) * q + alpha * (r + beta * max_next)
}

/// `(1 - α) q + α (r + β q_next)` with the committed next action's value.
pub fn sarsa_update(q: f64, r: f64, q_next: f64, alpha: f64, beta: f64) -> f64 {
    (1.0 - alpha) * q + alpha * (r + beta * q_next)
}

/// Action values per discretized state; unseen entries read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: BTreeMap<StateKey, Vec<f64>>,
    n_actions: usize,
    pub alpha: f64,
    pub beta: f64,
    pub ell: f64,
}

impl QTable {
    pub fn new(n_actions: usize, hyper: &TabularHyper) -> Self {
        Self {
            values: BTreeMap::new(),
            n_actions,
            alpha: hyper.alpha,
            beta: hyper.beta,
            ell: hyper.ell,
        }
    }

    pub fn row(&self, s: &StateKey) -> Vec<f64> {
        self.values.get(s).cloned().unwrap_or_else(|| vec![0.0; self.n_actions])
    }

    pub fn get(&self, s: &StateKey, a: usize) -> f64 {
        self.values.get(s).map_or(0.0, |r| r[a])
    }

    fn row_mut(&mut self, s: &StateKey) -> &mut Vec<f64> {
        let n = self.n_actions;
        self.values.entry(*s).or_insert_with(|| vec![0.0; n])
    }

    pub fn max(&self, s: &StateKey) -> f64 {
        self.values
            .get(s)
            .map_or(0.0, |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Off-policy update of `Q(s, a)`.
    pub fn update_q(&mut self, s: &StateKey, a: usize, r: f64, next: &StateKey) -> f64 {
        let max_next = self.max(next);
        let (alpha, beta) = (self.alpha, self.beta);
        let q = &mut self.row_mut(s)[a];
        *q = q_update(*q, r, max_next, alpha, beta);
        *q
    }

    /// On-policy update of `Q(s, a)` towards `Q(next, a_next)`.
    pub fn update_sarsa(&mut self, s: &StateKey, a: usize, r: f64, next: &StateKey, a_next: usize) -> f64 {
        let q_next = self.get(next, a_next);
        let (alpha, beta) = (self.alpha, self.beta);
        let q = &mut self.row_mut(s)[a];
        *q = sarsa_update(*q, r, q_next, alpha, beta);
        *q
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> f64 {
        self.values
            .values()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy)]
enum Rule {
    OffPolicy,
    OnPolicy,
}

fn train(env: &RelayEnv, hyper: &TabularHyper, seed: u64, rule: Rule) -> TrainResult {
    let tag = match rule {
        Rule::OffPolicy => StreamTag::QLearning,
        Rule::OnPolicy => StreamTag::Sarsa,
    };
    let mut rng = rng::stream(seed, tag, env.node as u64);
    let n = env.n_actions();
    let keys: Vec<StateKey> = (0..n).map(|a| discretize(&env.state(a), env.epsilon)).collect();
    let rewards: Vec<f64> = (0..n).map(|a| env.reward(a)).collect();
    let bound = rewards.iter().copied().fold(0.0, f64::max) / (1.0 - hyper.beta);

    let mut q = QTable::new(n, hyper);
    let mut trace = Vec::with_capacity(hyper.episodes);
    let mut s = keys[0];
    for episode in 0..hyper.episodes {
        s = keys[rng::index(&mut rng, n)];
        let mut a = epsilon_greedy(&q.row(&s), q.ell, &mut rng).0;
        let mut total = 0.0;
        for _ in 0..hyper.epochs.max(1) {
            let r = rewards[a];
            let next = keys[a];
            total += r;
            let a_next = epsilon_greedy(&q.row(&next), q.ell, &mut rng).0;
            let v = match rule {
                Rule::OffPolicy => q.update_q(&s, a, r, &next),
                Rule::OnPolicy => q.update_sarsa(&s, a, r, &next, a_next),
            };
            debug_assert!(v.abs() <= bound * (1.0 + 1e-9) + 1e-12);
            s = next;
            a = a_next;
        }
        trace.push(EpisodeRecord {
            episode,
            mean_reward: total / hyper.epochs.max(1) as f64,
            relay: env.relay(argmax(&q.row(&s))),
        });
    }
    let a = argmax(&q.row(&s));
    TrainResult {
        choice: RelayChoice {
            relay: env.relay(a),
            action: a,
            reward: rewards[a],
        },
        trace,
    }
}

/// Q-table relay selection.
pub fn train_qlearning(env: &RelayEnv, hyper: &TabularHyper, seed: u64) -> TrainResult {
    train(env, hyper, seed, Rule::OffPolicy)
}

/// Sarsa relay selection.
pub fn train_sarsa(env: &RelayEnv, hyper: &TabularHyper, seed: u64) -> TrainResult {
    train(env, hyper, seed, Rule::OnPolicy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_update_examples() {
        assert!((q_update(0.0, 1.0, 0.0, 0.1, 0.9) - 0.1).abs() < 1e-15);
        assert_eq!(q_update(3.0, 2.0, 5.0, 1.0, 0.9), 2.0 + 0.9 * 5.0);
        let q = 4.0;
        assert!((q_update(q, 0.0, q / 0.9, 0.3, 0.9) - q).abs() < 1e-12);
    }

    #[test]
    fn sarsa_update_examples() {
        assert_eq!(sarsa_update(0.0, 0.3, 0.7, 0.2, 0.9), q_update(0.0, 0.3, 0.7, 0.2, 0.9));
        assert_eq!(sarsa_update(5.0, 0.0, 9.0, 1.0, 0.0), 0.0);
        assert!((sarsa_update(0.0, 0.0, 0.5, 0.1, 0.9) - 0.045).abs() < 1e-15);
        assert!((q_update(0.0, 0.0, 0.9, 0.1, 0.9) - 0.081).abs() < 1e-15);
    }

    #[test]
    fn discretize_bins() {
        let k = discretize(&[0.0, 0.5, 1.0, 0.0, 1e3, 1e12], 0.01);
        assert_eq!(k, [0, 1, 1, 0, 0, 7]);
        let k = discretize(&[0.0, 0.0, 0.0, 5e8, 2.5e4, 5e6], 0.01);
        assert_eq!(&k[3..], &[7, 1, 4]);
    }
}
