//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 keyed by the run seed, with
//! the 64-bit ChaCha stream id derived from a module tag and a sub-key (node
//! id, cluster count, ...). Two components never share a stream, and adding
//! draws to one component never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand::Rng;

pub type StreamRng = ChaCha8Rng;

/// Module tags. Values are part of the reproducibility contract; do not reorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum StreamTag {
    Scenario = 1,
    Cluster = 2,
    QLearning = 3,
    Sarsa = 4,
    Dqn = 5,
    Moead = 6,
    Fuzz = 7,
}

/// RNG for `(seed, tag, sub)`.
pub fn stream(seed: u64, tag: StreamTag, sub: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((tag as u64) << 48) ^ (sub & 0x0000_ffff_ffff_ffff));
    rng
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit(rng: &mut StreamRng) -> f64 {
    (rng.gen::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n`. `n` must be non-zero.
#[inline]
pub fn index(rng: &mut StreamRng, n: usize) -> usize {
    rng.gen_range(0..n)
}
