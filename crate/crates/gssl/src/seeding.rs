//! Deterministic seed derivation.
//!
//! Every randomized operation in this crate takes an explicit seed; derived
//! streams (per repetition, per tree, per defense arm) are obtained by mixing
//! the parent seed with a tag and an index. The mixer is a fixed splitmix64
//! chain rather than `std`'s hasher, so derived seeds are stable across Rust
//! releases and platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `(base, tag, index)`.
pub fn derive_seed(base: u64, tag: &str, index: u64) -> u64 {
    let mut h = splitmix64(base ^ 0x5bf0_3635_dcb1_e8f7);
    for b in tag.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

/// The RNG used throughout the crate, seeded from a plain `u64`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
