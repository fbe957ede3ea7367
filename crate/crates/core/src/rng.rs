//! Reproducible random streams.
//!
//! Every random quantity in the crate comes from a [`ChaCha8Rng`] obtained by
//! [`replicate_rng`]: the generator is seeded from a 64-bit seed and then
//! switched to the ChaCha stream numbered by the replicate index. Streams with
//! different indices are independent, and replicate `i` sees the same numbers no
//! matter which worker runs it. Sub-experiments derive their own seed from the
//! master seed with [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// SplitMix64 output function.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `master`: `seed = mix(... mix(mix(master) ^ tag0) ^ tag1 ...)`.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(master), |acc, &tag| mix(acc ^ tag))
}

/// The random stream of replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
