//! Counter-based RNG substreams.
//!
//! Every independent unit of work (a fund, a Monte-Carlo replica) gets its
//! own ChaCha8 stream keyed by the run seed and a stream id, so results do
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids at the top of the range are reserved for universe-level draws.
pub const CAPITALIZATION_STREAM: u64 = u64::MAX;
pub const FUND_SIZE_STREAM: u64 = u64::MAX - 1;
/// Base of the streams used to size generator bins, one per bin.
pub const KERNEL_STREAM_BASE: u64 = 3 << 62;
pub const NOISE_STREAM_BASE: u64 = 1 << 62;

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for replica `replica` of grid point `point`.
pub fn grid_stream(point: usize, replica: usize) -> u64 {
    ((point as u64) << 32) | replica as u64
}
