//! Deterministic seed derivation for parallel replicate loops.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 mix of a base seed and a replicate counter.
///
/// Replicate `r` always receives the same stream no matter which worker
/// thread runs it, so parallel Monte-Carlo loops are order-independent.
pub fn derive_seed(base: u64, counter: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(counter.wrapping_mul(0xd1b54a32d192ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stream cipher RNG for a derived replicate seed.
pub fn replicate_rng(base: u64, counter: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(base, counter))
}
