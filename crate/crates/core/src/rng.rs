//! Seeded random streams.
//!
//! Streams are keyed by a master seed plus a tag path (purpose, epoch,
//! sample index, ...) so that any consumer can reconstruct its stream without
//! depending on how much randomness others have drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub(crate) const TAG_INIT: u64 = 0x494e_4954;
pub(crate) const TAG_SHUFFLE: u64 = 0x5348_5546;
pub(crate) const TAG_DROPOUT: u64 = 0x4452_4f50;
pub(crate) const TAG_MC: u64 = 0x4d43_5053;
pub(crate) const TAG_TUNE: u64 = 0x5455_4e45;
pub(crate) const TAG_SYNTH: u64 = 0x5359_4e54;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a 64-bit seed from a master seed and a tag path.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, tags))
}
