//! Deterministic random streams derived from one master seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEARCH_STREAM: u64 = 1;
const BLOCKING_STREAM: u64 = 2;
const TARGET_SEED_STREAM: u64 = 3;
const SURROGATE_STREAM: u64 = 4;
const EVALUATION_STREAM: u64 = 5;

/// The independent streams used by one configurator run.
#[derive(Debug, Clone)]
pub struct RunStreams {
    /// neighbourhood orders, random configurations, restarts
    pub search: ChaCha8Rng,
    /// instance order of the blocked list
    pub blocking: ChaCha8Rng,
    /// target-algorithm seeds of the blocked list
    pub target_seeds: ChaCha8Rng,
    /// seeds of held-out test runs
    pub evaluation: ChaCha8Rng,
    pub surrogate_seed: u64,
}

fn stream(master: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

/// Splits `master_seed` into ChaCha streams that share a key but use
/// distinct stream ids, so they never overlap.
pub fn derive_rngs(master_seed: u64) -> RunStreams {
    RunStreams {
        search: stream(master_seed, SEARCH_STREAM),
        blocking: stream(master_seed, BLOCKING_STREAM),
        target_seeds: stream(master_seed, TARGET_SEED_STREAM),
        evaluation: stream(master_seed, EVALUATION_STREAM),
        surrogate_seed: stream(master_seed, SURROGATE_STREAM).next_u64(),
    }
}
