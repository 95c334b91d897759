//! Deterministic parallel execution of independent trajectories.
//!
//! Trajectories are sharded into fixed-size index chunks; each chunk is
//! processed sequentially by whichever worker picks it up and produces a
//! partial result. Partials are collected in chunk order and merged
//! sequentially by the caller, so floating-point accumulation order — and
//! therefore every output bit — is independent of the worker count and of
//! scheduling.
//!
//! Per-trajectory randomness comes from one ChaCha stream per trajectory
//! index, derived from the campaign seed, so a trajectory's initial
//! condition does not depend on which chunk or worker ran it.

use std::ops::Range;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Fixed shard width. Part of the deterministic-output contract: changing
/// it reorders float accumulation, so it is a constant, not a knob.
pub(crate) const CHUNK_SIZE: usize = 256;

/// RNG stream for one trajectory of a seeded campaign.
pub fn trajectory_rng(seed: u64, trajectory_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory_index);
    rng
}

/// Run `run_chunk` over `0..samples` in fixed chunks, in parallel, and
/// return the partials in chunk order.
pub(crate) fn run_chunked<P, F>(samples: usize, run_chunk: F) -> Vec<P>
where
    P: Send,
    F: Fn(Range<usize>) -> P + Sync + Send,
{
    let ranges: Vec<Range<usize>> = (0..samples)
        .step_by(CHUNK_SIZE)
        .map(|lo| lo..(lo + CHUNK_SIZE).min(samples))
        .collect();
    ranges.into_par_iter().map(run_chunk).collect()
}
