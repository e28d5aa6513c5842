//! Seed derivation for reproducible, order-independent trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type TrialRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a list of 64-bit words into one seed. Changing any word changes the
/// result; the order of words matters.
pub fn mix_seed(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6a09_e667_f3bc_c908, |acc, &w| splitmix(acc ^ splitmix(w)))
}

pub fn rng_from(words: &[u64]) -> TrialRng {
    TrialRng::seed_from_u64(mix_seed(words))
}
