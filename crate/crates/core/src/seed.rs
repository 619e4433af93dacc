//! Seed derivation.
//!
//! Every random stream in the toolkit is a ChaCha8 generator seeded from a
//! 64-bit value. A run has one master seed; each consumer gets its own seed
//! `splitmix64(master ^ tag)` where `tag` is a fixed constant per purpose.
//! Sweep jobs use `tag = SWEEP_BASE + P_n`, so each hidden-layer size gets an
//! independent but reproducible stream regardless of which other sizes are
//! in the sweep or in what order the jobs finish.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CAMPAIGN: u64 = 0x01;
pub const SPLIT: u64 = 0x02;
pub const TRAIN: u64 = 0x03;
pub const EVAL: u64 = 0x04;
pub const SWEEP_BASE: u64 = 0x1_0000;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ tag)
}

/// Seed used for the sweep job training a network with `hidden` neurons.
pub fn for_hidden_size(master: u64, hidden: usize) -> u64 {
    derive(master, SWEEP_BASE + hidden as u64)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
