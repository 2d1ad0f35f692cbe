//! Deterministic seed derivation.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` obtained via
//! [`substream`], keyed by a master seed and a path of integers (experiment
//! id, replicate index, edge index, ...). Streams are reproducible regardless
//! of iteration order or how replicates are partitioned across worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; a well-mixing 64-bit permutation.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Derive a 64-bit substream key from a master seed and a path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = mix64(master ^ GOLDEN);
    for (depth, part) in path.iter().enumerate() {
        let salted = part.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN));
        state = mix64(state ^ mix64(salted));
    }
    state
}

/// RNG for the substream identified by `(master, path)`.
pub fn substream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
