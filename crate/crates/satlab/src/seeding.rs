//! Deterministic derivation of per-task random streams from one master seed.
//!
//! Every random decision in the crate flows from a 64-bit master seed through
//! named sub-streams: `derive_seed(master, label, index)` mixes the label text
//! and a task index into a fresh 64-bit seed with a splitmix64-style finalizer.
//! Two streams collide only if both their labels and indices collide, so
//! independent pipeline stages (generation, solving, splitting) can hand out
//! seeds without coordinating, and re-running any stage with the same master
//! seed reproduces it bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer: a cheap bijective mixer with good avalanche behavior.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of the sub-stream `(label, index)` under `master`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut state = splitmix64(master);
    for &byte in label.as_bytes() {
        state = splitmix64(state ^ u64::from(byte));
    }
    splitmix64(splitmix64(state ^ index))
}

/// A ChaCha8 generator seeded from the sub-stream `(label, index)`.
///
/// ChaCha8 is used everywhere in the crate: it is fast, portable, and its
/// output is identical across platforms, which keeps every artifact
/// byte-reproducible.
pub fn rng(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label, index))
}

/// A ChaCha8 generator seeded directly from a raw 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_deterministic() {
        assert_eq!(derive_seed(42, "gen", 7), derive_seed(42, "gen", 7));
    }

    #[test]
    fn label_and_index_both_matter() {
        let base = derive_seed(42, "gen", 7);
        assert_ne!(base, derive_seed(42, "gen", 8));
        assert_ne!(base, derive_seed(42, "solve", 7));
        assert_ne!(base, derive_seed(43, "gen", 7));
    }

    #[test]
    fn labels_are_not_prefix_confusable() {
        // "ab" with index 0 must differ from "a" followed by byte 'b' tricks;
        // spot-check a few adjacent label/index encodings.
        assert_ne!(derive_seed(1, "ab", 0), derive_seed(1, "a", u64::from(b'b')));
        assert_ne!(derive_seed(1, "", 5), derive_seed(1, "\x05", 0));
    }

    #[test]
    fn derived_seeds_look_well_spread() {
        // Weak sanity check: 1000 consecutive indices produce 1000 distinct
        // seeds with no obvious low-bit bias.
        let mut seen = std::collections::HashSet::new();
        let mut ones = 0u32;
        for i in 0..1000 {
            let s = derive_seed(0, "spread", i);
            assert!(seen.insert(s));
            ones += (s & 1) as u32;
        }
        assert!((350..=650).contains(&ones), "low bit heavily biased: {ones}");
    }
}
