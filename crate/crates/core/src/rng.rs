//! Seeded random streams. Every generator and solver draws from [`Prng`] seeded by a
//! 64-bit value, so outputs are reproducible across runs and platforms.

use rand::SeedableRng;

pub type Prng = rand_chacha::ChaCha8Rng;

/// Identifier written into output metadata.
pub const PRNG_ID: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub fn rng_from_seed(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; used to derive independent sub-seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for stream `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}
