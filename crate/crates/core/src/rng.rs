//! Deterministic random streams.
//!
//! Every realization owns independent ChaCha streams derived from a single
//! seed, so that switching one model feature on or off (for example array
//! axis visibility) leaves the draws of every other feature untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream used for cluster birth, death and parameter generation.
pub const STREAM_EVOLUTION: u64 = 0;
/// Stream used for polarization phases and the LOS phase.
pub const STREAM_PHASES: u64 = 1;
/// Stream used for array-axis visibility sets.
pub const STREAM_VISIBILITY: u64 = 2;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
