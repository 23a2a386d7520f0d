//! Deterministic random streams.
//!
//! Every independent unit of work (a bandit grid cell, a trial, a training
//! run, the replay sampler inside a run) gets its own ChaCha stream whose seed
//! is derived from a master seed and a path of integer tags. Derivation is a
//! pure function, so a unit's stream is the same no matter which thread runs
//! it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags used inside a training run.
pub mod tags {
    pub const NET_INIT: u64 = 1;
    pub const ENV_TRAIN: u64 = 2;
    pub const ACTION: u64 = 3;
    pub const REPLAY: u64 = 4;
    pub const ENV_EVAL: u64 = 5;
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of tags.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &t| mix(acc ^ mix(t)))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
