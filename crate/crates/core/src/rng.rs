//! The one seeded generator used everywhere: ChaCha8 from `rand_chacha`.
//!
//! Independent streams (weight init, batch shuffling, synthetic data) are
//! derived from a base seed with [`stream`] so that adding draws to one stream
//! never perturbs another.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Deterministic generator for a named sub-stream of `seed`.
pub fn stream(seed: u64, label: &str) -> Rng {
    // FNV-1a over the label, mixed into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    Rng::seed_from_u64(seed ^ h.rotate_left(17))
}
