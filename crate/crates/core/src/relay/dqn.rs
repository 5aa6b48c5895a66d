use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::env::{argmax, epsilon_greedy, RelayEnv, State};
use super::{EpisodeRecord, RelayChoice, TrainResult};
use crate::math;
use crate::rng::{self, StreamRng, StreamTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DqnError {
    #[error("network parameters became non-finite")]
    DivergedParameters,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DqnHyper {
    pub beta: f64,
    pub ell: f64,
    pub episodes: usize,
    pub epochs: usize,
    /// Gradient steps per environment step (M).
    pub train_steps: usize,
    pub minibatch: usize,
    pub replay_capacity: usize,
    /// Number of past states stacked with the current one (N).
    pub window: usize,
    pub hidden: usize,
    pub step_size: f64,
}

impl Default for DqnHyper {
    fn default() -> Self {
        Self {
            beta: 0.9,
            ell: 0.1,
            episodes: 100,
            epochs: 20,
            train_steps: 1,
            minibatch: 32,
            replay_capacity: 1000,
            window: 1,
            hidden: 16,
            step_size: 0.01,
        }
    }
}

/// One stored step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub phi: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub phi_next: Vec<f64>,
}

/// Bounded FIFO of transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    /// Uniform sample with replacement.
    pub fn sample<'a>(&'a self, n: usize, rng: &mut StreamRng) -> Vec<&'a Transition> {
        (0..n).map(|_| &self.items[rng::index(rng, self.items.len())]).collect()
    }
}

/// Fully connected network with two tanh hidden layers and a linear output.
/// Parameters live in one flat vector: `w1, b1, w2, b2, w3, b3`, weights
/// row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QNet {
    pub n_in: usize,
    pub hidden: usize,
    pub n_out: usize,
    pub params: Vec<f64>,
}

/// Hidden and output activations of one forward pass.
#[derive(Debug, Clone, Default)]
pub struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    out: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        &self.out
    }
}

fn dense(p: &[f64], w: usize, b: usize, input: &[f64], out: &mut Vec<f64>, n_out: usize) {
    out.clear();
    let n_in = input.len();
    for r in 0..n_out {
        let row = &p[w + r * n_in..w + (r + 1) * n_in];
        let mut acc = p[b + r];
        for (a, x) in row.iter().zip(input) {
            acc += a * x;
        }
        out.push(acc);
    }
}

impl QNet {
    pub fn n_params(n_in: usize, hidden: usize, n_out: usize) -> usize {
        hidden * n_in + hidden + hidden * hidden + hidden + n_out * hidden + n_out
    }

    /// Glorot-uniform weights, zero biases.
    pub fn new(n_in: usize, hidden: usize, n_out: usize, rng: &mut StreamRng) -> Self {
        let mut params = vec![0.0; Self::n_params(n_in, hidden, n_out)];
        let layers = [(n_in, hidden), (hidden, hidden), (hidden, n_out)];
        let mut off = 0;
        for (fan_in, fan_out) in layers {
            let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
            for w in &mut params[off..off + fan_in * fan_out] {
                *w = (2.0 * rng::unit(rng) - 1.0) * limit;
            }
            off += fan_in * fan_out + fan_out;
        }
        Self {
            n_in,
            hidden,
            n_out,
            params,
        }
    }

    fn offsets(&self) -> [usize; 6] {
        let (i, h, o) = (self.n_in, self.hidden, self.n_out);
        let w1 = 0;
        let b1 = w1 + h * i;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let w3 = b2 + h;
        let b3 = w3 + o * h;
        [w1, b1, w2, b2, w3, b3]
    }

    /// Forward pass into reusable buffers.
    pub fn forward_into(&self, x: &[f64], act: &mut Activations) {
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let p = &self.params;
        dense(p, w1, b1, x, &mut act.h1, self.hidden);
        act.h1.iter_mut().for_each(|v| *v = math::tanh(*v));
        dense(p, w2, b2, &act.h1, &mut act.h2, self.hidden);
        act.h2.iter_mut().for_each(|v| *v = math::tanh(*v));
        dense(p, w3, b3, &act.h2, &mut act.out, self.n_out);
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut act = Activations::default();
        self.forward_into(x, &mut act);
        act.out
    }

    /// Adds `scale · ∂Q(x)[a]/∂w` into `grad`, given the activations of `x`.
    pub fn backprop(&self, x: &[f64], a: usize, scale: f64, act: &mut Activations, grad: &mut [f64]) {
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let (h, n_in) = (self.hidden, self.n_in);
        let p = &self.params;

        grad[b3 + a] += scale;
        act.d2.clear();
        for j in 0..h {
            grad[w3 + a * h + j] += scale * act.h2[j];
            act.d2.push(scale * p[w3 + a * h + j] * (1.0 - act.h2[j] * act.h2[j]));
        }
        act.d1.clear();
        act.d1.resize(h, 0.0);
        for r in 0..h {
            let d = act.d2[r];
            grad[b2 + r] += d;
            let row = w2 + r * h;
            for j in 0..h {
                grad[row + j] += d * act.h1[j];
                act.d1[j] += d * p[row + j];
            }
        }
        for j in 0..h {
            let d = act.d1[j] * (1.0 - act.h1[j] * act.h1[j]);
            grad[b1 + j] += d;
            let row = w1 + j * n_in;
            for k in 0..n_in {
                grad[row + k] += d * x[k];
            }
        }
    }

    /// Adds `scale · ∂Q(x)[a]/∂w` into `grad`; returns `Q(x)[a]`.
    pub fn accumulate_grad(&self, x: &[f64], a: usize, scale: f64, grad: &mut [f64]) -> f64 {
        let mut act = Activations::default();
        self.forward_into(x, &mut act);
        self.backprop(x, a, scale, &mut act, grad);
        act.out[a]
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }
}

/// Bootstrap targets `r + β max_a Q(φ', a)` evaluated with the given net.
pub fn targets(net: &QNet, batch: &[&Transition], beta: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            let next = net.forward(&t.phi_next);
            t.reward + beta * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Squared temporal-difference loss `½ mean (y − Q(φ, a))²` with fixed targets.
pub fn loss(net: &QNet, batch: &[&Transition], targets: &[f64]) -> f64 {
    let n = batch.len() as f64;
    batch
        .iter()
        .zip(targets)
        .map(|(t, y)| {
            let d = y - net.forward(&t.phi)[t.action];
            0.5 * d * d
        })
        .sum::<f64>()
        / n
}

/// Gradient of [`loss`]: `−mean δ ∂Q(φ, a)/∂w`.
pub fn loss_grad(net: &QNet, batch: &[&Transition], targets: &[f64]) -> Vec<f64> {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; net.params.len()];
    for (t, y) in batch.iter().zip(targets) {
        let q = net.forward(&t.phi)[t.action];
        net.accumulate_grad(&t.phi, t.action, -(y - q) / n, &mut grad);
    }
    grad
}

struct Scratch {
    act: Activations,
    grad: Vec<f64>,
    targets: Vec<f64>,
}

impl Scratch {
    fn new(n_params: usize) -> Self {
        Self {
            act: Activations::default(),
            grad: vec![0.0; n_params],
            targets: Vec::new(),
        }
    }
}

/// One gradient-descent step on the minibatch loss; same arithmetic as
/// [`targets`] followed by [`loss_grad`], without per-sample allocation.
fn sgd_step(net: &mut QNet, batch: &[&Transition], beta: f64, step: f64, s: &mut Scratch) {
    s.targets.clear();
    for t in batch {
        net.forward_into(&t.phi_next, &mut s.act);
        let m = s.act.out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        s.targets.push(t.reward + beta * m);
    }
    s.grad.iter_mut().for_each(|g| *g = 0.0);
    let n = batch.len() as f64;
    for (t, y) in batch.iter().zip(&s.targets) {
        net.forward_into(&t.phi, &mut s.act);
        let q = s.act.out[t.action];
        net.backprop(&t.phi, t.action, -(y - q) / n, &mut s.act, &mut s.grad);
    }
    for (w, g) in net.params.iter_mut().zip(&s.grad) {
        *w -= step * g;
    }
}

/// Input scaling: outages as-is, capacities divided by `capacity_scale`.
pub fn features(state: &State, capacity_scale: f64) -> [f64; 6] {
    let mut f = *state;
    for c in &mut f[3..] {
        *c /= capacity_scale;
    }
    f
}

/// Reward scaled into `[0, 1]` by the largest reward on offer.
pub fn shaped_reward(r: f64, r_max: f64) -> f64 {
    if r_max <= 0.0 {
        0.0
    } else {
        r / r_max
    }
}

struct Window {
    states: VecDeque<[f64; 6]>,
    len: usize,
}

impl Window {
    fn new(first: [f64; 6], window: usize) -> Self {
        let len = window + 1;
        Self {
            states: core::iter::repeat(first).take(len).collect(),
            len,
        }
    }

    fn push(&mut self, s: [f64; 6]) {
        self.states.pop_back();
        self.states.push_front(s);
        debug_assert_eq!(self.states.len(), self.len);
    }

    fn phi(&self) -> Vec<f64> {
        self.states.iter().flat_map(|s| s.iter().copied()).collect()
    }
}

/// Neural relay selection with experience replay.
pub fn train_dqn(env: &RelayEnv, hyper: &DqnHyper, seed: u64) -> Result<TrainResult, DqnError> {
    let mut rng = rng::stream(seed, StreamTag::Dqn, env.node as u64);
    let n = env.n_actions();
    let rewards: Vec<f64> = (0..n).map(|a| env.reward(a)).collect();
    let r_max = rewards.iter().copied().fold(0.0, f64::max);
    let cap_scale = (0..n)
        .flat_map(|a| env.state(a)[3..].to_vec())
        .fold(0.0, f64::max)
        .max(1.0);
    let obs: Vec<[f64; 6]> = (0..n).map(|a| features(&env.state(a), cap_scale)).collect();
    let shaped: Vec<f64> = rewards.iter().map(|&r| shaped_reward(r, r_max)).collect();

    let mut net = QNet::new(6 * (hyper.window + 1), hyper.hidden, n, &mut rng);
    let mut replay = ReplayBuffer::new(hyper.replay_capacity.max(hyper.minibatch));
    let mut trace = Vec::with_capacity(hyper.episodes);
    let mut window = Window::new(obs[0], hyper.window);
    let mut scratch = Scratch::new(net.params.len());

    for episode in 0..hyper.episodes {
        window = Window::new(obs[rng::index(&mut rng, n)], hyper.window);
        let mut total = 0.0;
        for _ in 0..hyper.epochs.max(1) {
            let phi = window.phi();
            let (a, _) = epsilon_greedy(&net.forward(&phi), hyper.ell, &mut rng);
            total += rewards[a];
            window.push(obs[a]);
            replay.push(Transition {
                phi,
                action: a,
                reward: shaped[a],
                phi_next: window.phi(),
            });
            for _ in 0..hyper.train_steps {
                let batch = replay.sample(hyper.minibatch.min(replay.len()).max(1), &mut rng);
                sgd_step(&mut net, &batch, hyper.beta, hyper.step_size, &mut scratch);
                if !net.is_finite() {
                    return Err(DqnError::DivergedParameters);
                }
            }
        }
        trace.push(EpisodeRecord {
            episode,
            mean_reward: total / hyper.epochs.max(1) as f64,
            relay: env.relay(argmax(&net.forward(&window.phi()))),
        });
    }
    let a = argmax(&net.forward(&window.phi()));
    Ok(TrainResult {
        choice: RelayChoice {
            relay: env.relay(a),
            action: a,
            reward: rewards[a],
        },
        trace,
    })
}
