//! Seed derivation.
//!
//! Every stochastic subsystem draws from its own deterministic stream derived
//! from the run seed, so adding or removing consumers in one place (say, an
//! extra validation pass) never perturbs another (the parameter trajectory).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INIT: u64 = 0x01;
pub const SHUFFLE: u64 = 0x02;
pub const BATCH: u64 = 0x03;
pub const EVAL: u64 = 0x04;
pub const DATA: u64 = 0x05;
pub const SPLIT: u64 = 0x06;
pub const PERM_IMPORTANCE: u64 = 0x07;
pub const RETRAIN: u64 = 0x08;

/// splitmix64 finalizer; decorrelates nearby (seed, tag) pairs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed for a tagged stream, with an optional index (epoch,
/// step, repeat) to split the stream further.
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    mix(mix(seed ^ mix(tag)) ^ index)
}

/// Seeded generator for a tagged stream.
pub fn rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag, index))
}
