//! Seedable, portable random number generation.
//!
//! All stochastic operations in this crate take an explicit generator so
//! that every artifact is bit-reproducible from a config seed, on any
//! platform. ChaCha8 is the single generator used everywhere.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by every stochastic operation in the crate.
pub type Rng = ChaCha8Rng;

/// Create a generator from a 64-bit seed.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent substream for `(seed, index)`.
///
/// Samples generated in parallel (one substream per sample) are identical
/// to sequential generation because each substream depends only on the
/// pair, not on consumption order.
pub fn substream(seed: u64, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, index))
}

/// SplitMix64-style mixing of a seed and a stream index.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn substreams_are_decorrelated_and_deterministic() {
        let mut a = substream(7, 0);
        let mut b = substream(7, 1);
        let mut a2 = substream(7, 0);
        let xa: u64 = a.gen();
        let xb: u64 = b.gen();
        assert_ne!(xa, xb);
        assert_eq!(xa, a2.gen::<u64>());
    }
}
