//! State representations for identical oscillators on a ring.
//!
//! Two coordinate systems are used throughout the crate:
//!
//! * [`RingState`] — the raw oscillator phases `θ_j ∈ [0, 2π)`, the primal
//!   state that the integrator advances.
//! * [`PhaseDiffState`] — the wrapped neighbor differences
//!   `η_j = θ_{j+1} − θ_j ∈ (−π, π]` (index `n−1` wraps back to `0`), the
//!   working representation for winding numbers, invariant-region tests and
//!   the energy.
//!
//! The wrap convention is the half-open interval `(−π, π]`: both `+π` and
//! `−π` map to `+π`. All diff-space code routes additive updates through
//! [`wrap_to_pi`] (or its internal unchecked twin) so the convention holds
//! everywhere.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Minimum ring size. Below three oscillators the "ring" degenerates.
pub const MIN_RING_SIZE: usize = 3;

/// Tolerance around ±π inside which the winding number is ill-defined.
pub const WINDING_BRANCH_TOL: f64 = 1e-12;

/// Relative tolerance (per oscillator) for the diff-sum invariant
/// `Σ η_j = 2π·q`.
pub const DIFF_SUM_TOL: f64 = 1e-9;

/// Wrap an angle into the half-open interval `(−π, π]`.
///
/// Both boundary values map to `+π`: `wrap_to_pi(−π) == π`.
/// Non-finite input is rejected.
pub fn wrap_to_pi(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wrap_to_pi requires a finite angle, got {x}"
        )));
    }
    Ok(wrap_raw(x))
}

/// Unchecked wrap into `(−π, π]` for values already known to be finite.
///
/// In-range inputs are returned bit-identically, so wrapping is a true
/// no-op on already-wrapped data.
#[inline]
pub(crate) fn wrap_raw(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = x.rem_euclid(TAU);
    // rem_euclid returns [0, 2π); fold the upper half down. Exactly π stays π.
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Phases of `n` oscillators on a ring, normalized into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingState {
    phases: Vec<f64>,
}

impl RingState {
    /// Build a state from raw phases. Values are normalized into `[0, 2π)`.
    pub fn new(mut phases: Vec<f64>) -> Result<Self> {
        if phases.len() < MIN_RING_SIZE {
            return Err(Error::InvalidState(format!(
                "a ring needs at least {MIN_RING_SIZE} oscillators, got {}",
                phases.len()
            )));
        }
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite phase {bad}")));
        }
        for p in &mut phases {
            *p = p.rem_euclid(TAU);
        }
        Ok(Self { phases })
    }

    /// Wrap an already-normalized buffer without re-checking (hot paths).
    #[inline]
    pub(crate) fn from_normalized(phases: Vec<f64>) -> Self {
        debug_assert!(phases.len() >= MIN_RING_SIZE);
        debug_assert!(phases.iter().all(|p| (0.0..TAU).contains(p)));
        Self { phases }
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Mutable access for the integrator; callers must keep phases
    /// normalized.
    #[inline]
    pub(crate) fn phases_mut(&mut self) -> &mut [f64] {
        &mut self.phases
    }

    pub fn into_phases(self) -> Vec<f64> {
        self.phases
    }

    /// Wrapped neighbor differences `η_j = wrap(θ_{j+1} − θ_j)`, with the
    /// last index wrapping around the ring.
    pub fn to_diffs(&self) -> PhaseDiffState {
        let n = self.n();
        let mut diffs = vec![0.0; n];
        diffs_from_phases(&self.phases, &mut diffs);
        debug_assert!(n >= MIN_RING_SIZE);
        PhaseDiffState { diffs }
    }
}

/// Fill `out` with wrapped neighbor differences of `phases`.
#[inline]
pub(crate) fn diffs_from_phases(phases: &[f64], out: &mut [f64]) {
    let n = phases.len();
    for j in 0..n - 1 {
        out[j] = wrap_raw(phases[j + 1] - phases[j]);
    }
    out[n - 1] = wrap_raw(phases[0] - phases[n - 1]);
}

/// Wrapped phase differences `η_j ∈ (−π, π]` around the ring.
///
/// The sum of all `n` differences is an exact multiple of `2π` (each raw
/// gap differs from its wrap by a multiple of `2π` and the raw gaps
/// telescope to zero around the ring), which is what makes the winding
/// number well-defined.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiffState {
    diffs: Vec<f64>,
}

impl PhaseDiffState {
    /// Build from raw differences, validating both invariants: every value
    /// in `(−π, π]` and the sum within `DIFF_SUM_TOL·n` of a multiple of 2π.
    pub fn new(diffs: Vec<f64>) -> Result<Self> {
        if diffs.len() < MIN_RING_SIZE {
            return Err(Error::InvalidState(format!(
                "a ring needs at least {MIN_RING_SIZE} phase differences, got {}",
                diffs.len()
            )));
        }
        for (j, d) in diffs.iter().enumerate() {
            if !d.is_finite() || *d <= -PI || *d > PI {
                return Err(Error::InvalidState(format!(
                    "diff[{j}] = {d} lies outside (−π, π]"
                )));
            }
        }
        let sum: f64 = diffs.iter().sum();
        let turns = sum / TAU;
        if (turns - turns.round()).abs() * TAU > DIFF_SUM_TOL * diffs.len() as f64 {
            return Err(Error::InvalidState(format!(
                "diff sum {sum} is not a multiple of 2π"
            )));
        }
        Ok(Self { diffs })
    }

    #[inline]
    pub(crate) fn from_wrapped(diffs: Vec<f64>) -> Self {
        debug_assert!(diffs.iter().all(|d| *d > -PI && *d <= PI));
        Self { diffs }
    }

    pub fn n(&self) -> usize {
        self.diffs.len()
    }

    pub fn diffs(&self) -> &[f64] {
        &self.diffs
    }

    pub fn into_diffs(self) -> Vec<f64> {
        self.diffs
    }

    /// Net number of full `2π` turns the phases make around the ring.
    ///
    /// Computed as the nearest integer to `(Σ_{j<n−1} η_j)/2π`; when the
    /// invariants hold this equals `(Σ_j η_j)/2π` exactly. Fails when some
    /// difference sits within [`WINDING_BRANCH_TOL`] of the branch cut at
    /// ±π, where an infinitesimal perturbation changes the result.
    ///
    /// Rounding ties are impossible for valid states (the partial sum is
    /// never a half-integer multiple of 2π unless some `η_j = π`); as a
    /// defensive rule a tie would round half-to-even.
    pub fn winding_number(&self) -> Result<i64> {
        winding_of_diffs(&self.diffs, WINDING_BRANCH_TOL)
    }

    /// True when every difference lies strictly inside `(−π/2, π/2)`.
    ///
    /// This region is flow-invariant and the winding number is constant
    /// inside it.
    pub fn in_invariant_region(&self) -> bool {
        all_inside_half_pi(&self.diffs)
    }

    pub fn max_abs(&self) -> f64 {
        self.diffs.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

#[inline]
pub(crate) fn all_inside_half_pi(diffs: &[f64]) -> bool {
    diffs.iter().all(|d| d.abs() < FRAC_PI_2)
}

/// Invariant-region test straight off the phase buffer, short-circuiting
/// on the first gap at or beyond π/2.
#[inline]
pub(crate) fn all_gaps_inside(phases: &[f64]) -> bool {
    let n = phases.len();
    for j in 0..n - 1 {
        if wrap_raw(phases[j + 1] - phases[j]).abs() >= FRAC_PI_2 {
            return false;
        }
    }
    wrap_raw(phases[0] - phases[n - 1]).abs() < FRAC_PI_2
}

#[inline]
pub(crate) fn winding_of_diffs(diffs: &[f64], branch_tol: f64) -> Result<i64> {
    for (j, d) in diffs.iter().enumerate() {
        if PI - d.abs() < branch_tol {
            return Err(Error::IllDefinedWinding {
                index: j,
                value: *d,
                tol: branch_tol,
            });
        }
    }
    let partial: f64 = diffs[..diffs.len() - 1].iter().sum();
    let x = partial / TAU;
    // round-half-to-even; unreachable for valid states but cheap to honor
    let r = x.round();
    let rounded = if (x - x.trunc()).abs() == 0.5 {
        let down = x.trunc();
        if down as i64 % 2 == 0 {
            down
        } else {
            down + x.signum()
        }
    } else {
        r
    };
    Ok(rounded as i64)
}

/// Parameters of a twisted state: `n` phases advancing by `2πq/n` per site
/// plus a constant offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistSpec {
    n: usize,
    q: i64,
    offset: f64,
}

impl TwistSpec {
    /// `|q| ≤ n/2`; larger twists alias onto an equivalent state.
    pub fn new(n: usize, q: i64, offset: f64) -> Result<Self> {
        if n < MIN_RING_SIZE {
            return Err(Error::InvalidArgument(format!(
                "a ring needs at least {MIN_RING_SIZE} oscillators, got {n}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "twist offset must be finite, got {offset}"
            )));
        }
        if 2 * q.unsigned_abs() > n as u64 {
            return Err(Error::InvalidArgument(format!(
                "|q| = {} exceeds n/2 = {} and aliases another twist",
                q.unsigned_abs(),
                n as f64 / 2.0
            )));
        }
        Ok(Self { n, q, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Realize a twist as a ring state: `θ_j = 2πjq/n + offset`, normalized.
pub fn twisted_state(spec: &TwistSpec) -> RingState {
    let n = spec.n;
    let gap = TAU * spec.q as f64 / n as f64;
    let phases = (0..n)
        .map(|j| (spec.offset + gap * j as f64).rem_euclid(TAU))
        .collect();
    RingState::from_normalized(phases)
}

/// Linear-stability test for a `q`-twisted state on `n` oscillators:
/// stable iff `|q| < n/4` strictly.
pub fn is_stable_twist(n: usize, q: i64) -> bool {
    debug_assert!(n >= MIN_RING_SIZE);
    4 * q.unsigned_abs() < n as u64
}
