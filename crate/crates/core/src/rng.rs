//! Seeded random streams.
//!
//! All randomness in the crate flows through [`MlrRng`], a ChaCha8 stream
//! seeded from a `u64`. Independent streams for grid cells or workers are
//! obtained by mixing a base seed with integer coordinates through
//! [`derive_seed`], so no two consumers ever share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type MlrRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> MlrRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `base` with `parts` into a new seed. Order-sensitive.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
