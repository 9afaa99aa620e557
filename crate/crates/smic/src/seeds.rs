//! Deterministic sub-seed derivation.
//!
//! Every random choice in the crate flows from a single `u64` seed.
//! Independent consumers (label draws, noise, fold splits, restarts, basis
//! subsets) derive their own stream with [`split`], so adding or removing
//! one consumer never shifts the draws seen by another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const LABELS: u64 = 0x01;
pub(crate) const POSITIONS: u64 = 0x02;
pub(crate) const NOISE: u64 = 0x03;
pub(crate) const FOLDS: u64 = 0x04;
pub(crate) const FOLD_FIT: u64 = 0x05;
pub(crate) const FINAL_FIT: u64 = 0x06;
pub(crate) const LSMI: u64 = 0x07;
pub(crate) const RESTART: u64 = 0x08;

/// SplitMix64 finalizer over the combined (seed, tag) value.
pub(crate) fn split(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_deterministic_and_tag_sensitive() {
        assert_eq!(split(7, LABELS), split(7, LABELS));
        assert_ne!(split(7, LABELS), split(7, NOISE));
        assert_ne!(split(7, LABELS), split(8, LABELS));
    }
}
