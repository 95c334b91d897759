//! Random initial conditions.

use std::f64::consts::TAU;

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::ring::{RingState, MIN_RING_SIZE};

/// Draw `n` phases i.i.d. uniform on `[0, 2π)`.
///
/// The induced neighbor differences `η_1, …, η_{n−1}` are then i.i.d.
/// uniform on `(−π, π]` with `η_n` determined by the ring closure, which is
/// the measure every basin-size statement in this crate refers to.
pub fn sample_initial_condition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RingState {
    assert!(n >= MIN_RING_SIZE, "a ring needs at least {MIN_RING_SIZE} oscillators");
    let dist = Uniform::new(0.0, TAU).expect("valid uniform range");
    RingState::from_normalized((0..n).map(|_| dist.sample(rng)).collect())
}
