//! Deterministic per-trial seeding.
//!
//! Every trial owns its generator, derived from `(master_seed, size, trial)`
//! alone, so results do not depend on how trials are scheduled on workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at system size `size`.
pub fn trial_seed(master_seed: u64, size: u64, trial: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ size) ^ trial)
}

/// Like [`trial_seed`] but in a separate stream, for auxiliary samplers that
/// must not share seeds with the main trials.
pub fn stream_seed(master_seed: u64, stream: u64, size: u64, trial: u64) -> u64 {
    trial_seed(mix64(master_seed ^ stream.rotate_left(32)), size, trial)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
