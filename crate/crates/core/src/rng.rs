//! Seed derivation. Every random draw in a run comes from a ChaCha8 stream
//! keyed by the master seed, so runs are reproducible across platforms.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Independent consumers inside one trial. Each gets its own stream so that,
/// for example, a pilot drawing more numbers does not shift world spawns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Mechanics = 0,
    World = 1,
    Copilot = 2,
    Pilot = 3,
}

/// Seed of trial `trial` in block `block` under `master`.
pub fn trial_seed(master: u64, block: u32, trial: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((block as u64) << 32) | trial as u64);
    rng.next_u64()
}

pub fn stream(trial_seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(which as u64);
    rng
}
