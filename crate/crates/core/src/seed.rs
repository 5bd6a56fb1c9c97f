//! Seed derivation.
//!
//! Every pipeline stage draws from its own stream: the stage seed is
//! `splitmix64(seed ^ stage * 0x9E3779B97F4A7C15 ^ rotl(index, 32))`, so any
//! stage can be replayed from the top-level seed, the stage index and the
//! restart (or depth) index alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    CoreEmbedding = 1,
    ColorExtension = 2,
    StarForest = 3,
    Restart = 4,
    Sampler = 5,
    Assignment = 6,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(seed: u64, stage: Stage, index: u64) -> u64 {
    splitmix64(seed ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.rotate_left(32))
}

pub fn stage_rng(seed: u64, stage: Stage, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stage, index))
}
