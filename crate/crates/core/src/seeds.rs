//! Counter-mode seed derivation.
//!
//! Every trial gets its own seed computed from `(root, genus, trial)` alone,
//! so results do not depend on which worker runs which trial.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed for trial `trial` at genus `genus` under root seed `root`.
pub fn derive_seed(root: u64, genus: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(genus);
    rng.set_word_pos(u128::from(trial) * 2);
    rng.next_u64()
}

pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
