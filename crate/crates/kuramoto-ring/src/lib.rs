//! Identical Kuramoto oscillators on a ring.
//!
//! Each oscillator couples to its two neighbors through sines of phase
//! differences. The attractors are twisted states — phases advancing by a
//! constant gap `2πq/n` per site — and the crate is built around measuring
//! which twist a random initial condition falls into and when that outcome
//! is decided:
//!
//! * [`ring`] — phase and phase-difference states, wrapping, winding
//!   numbers, twisted states.
//! * [`dynamics`] — right-hand sides, energy, energy gradient.
//! * [`integrate`] — fixed-step RK4 on the phases (primary) and forward
//!   Euler on the differences (for discretization-error experiments).
//! * [`monitors`] — per-trajectory event detection: winding stabilization,
//!   invariant-region entry times, attractor classification.
//! * [`experiments`] — seeded, parallel Monte Carlo campaigns over random
//!   initial conditions; every campaign is bit-reproducible regardless of
//!   worker count.
//! * [`stats`] — the small statistics kernel the campaigns use.
//! * [`report`] — CSV bodies and the JSON run manifest.
//! * [`cli`] — the `kuramoto-ring` binary's subcommands.
//!
//! The runnable examples under `examples/` cover one campaign each; start
//! with `single_trajectory`.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod integrate;
pub mod monitors;
pub mod report;
pub mod ring;
pub mod stats;

pub use error::{Error, Result};
pub use experiments::{Campaign, CampaignOutput, ExperimentConfig};
pub use integrate::{euler_step, integrate, rk4_step};
pub use monitors::{classify_attractor, watch_trajectory, TrajectoryEvents, TrajectoryWatcher};
pub use ring::{
    is_stable_twist, twisted_state, wrap_to_pi, PhaseDiffState, RingState, TwistSpec,
};
