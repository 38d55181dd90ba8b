//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8 streams. A run has one
//! master seed; task `i` of a run (a scan point, an optimizer restart) draws
//! from `ChaCha8Rng::seed_from_u64(master)` with its stream set to `i`, so the
//! values a task sees do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for task `index` under `master`.
pub fn child(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
