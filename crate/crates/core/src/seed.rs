//! Seed derivation for reproducible fan-out.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a master seed and a
//! task index through [`derive_seed`], so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Weyl increment of SplitMix64 (odd, so `index ↦ master + (index+1)·γ` is injective mod 2⁶⁴).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
/// First SplitMix64 finalizer multiplier.
pub const MIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
/// Second SplitMix64 finalizer multiplier.
pub const MIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 finalizer; a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
    z ^ (z >> 31)
}

/// Child seed for task `index` under `master`. Injective in `index` for fixed `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for task `index` under `master`.
pub fn task_rng(master: u64, index: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn first_outputs_match_reference_splitmix() {
        // SplitMix64 seeded with 0 yields these as its first two outputs.
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn no_collisions_in_a_million_indices() {
        let master = 0xDEAD_BEEF;
        let mut seen = HashSet::with_capacity(1 << 20);
        for i in 0..1_000_000u64 {
            assert!(seen.insert(derive_seed(master, i)), "collision at {i}");
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 7), derive_seed(43, 7));
    }
}
