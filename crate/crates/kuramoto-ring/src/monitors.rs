//! Online event detection along a single trajectory.
//!
//! A [`TrajectoryWatcher`] advances one trajectory step by step and records
//! the observables the campaigns are built on:
//!
//! * the winding number after every step and the time of its last change
//!   (the stabilization time),
//! * the first time each wrapped difference enters `(−π/2, π/2)`, with
//!   sub-step resolution by linear interpolation between step endpoints,
//! * the entry time into the invariant region (the last per-coordinate
//!   entry), after which the winding number can no longer change.
//!
//! Winding numbers are sampled once per step. A difference that crossed ±π
//! and returned within a single step would go unnoticed; at the default
//! `h = 0.01` the per-step motion is bounded by `4h ≈ 0.04` rad, which makes
//! such double crossings a non-issue in practice, but it remains a
//! measurement convention rather than a guarantee.

use std::f64::consts::FRAC_PI_2;

use crate::dynamics::rhs_inf_norm;
use crate::integrate::Rk4Scratch;
use crate::ring::{diffs_from_phases, winding_of_diffs, RingState, WINDING_BRANCH_TOL};

/// ∞-norm threshold on the phase velocity below which a terminal state is
/// declared an equilibrium.
pub const CONVERGENCE_GRAD_TOL: f64 = 1e-8;

/// Events recorded along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEvents {
    /// Time of the last observed winding-number change (0 when it never
    /// changed). Only meaningful when the run reached the invariant region.
    pub stabilization_time: f64,
    /// First time every wrapped difference was inside `(−π/2, π/2)`;
    /// `None` when some coordinate never entered before the run ended.
    pub entry_time: Option<f64>,
    /// Per-coordinate first entry times into `(−π/2, π/2)`.
    pub entry_times: Vec<Option<f64>>,
    /// Winding number of the terminal state (last well-defined sample when
    /// the terminal value sits on the branch cut); `None` if no sample was
    /// ever well-defined.
    pub final_winding: Option<i64>,
    /// Terminal phase velocity is below [`CONVERGENCE_GRAD_TOL`].
    pub converged: bool,
    /// `(time, winding)` change points; the first element is the initial
    /// well-defined sample.
    pub q_timeline: Vec<(f64, i64)>,
}

impl TrajectoryEvents {
    /// Whether the winding number was frozen by entry into the invariant
    /// region; the terminal winding is then the attractor's.
    pub fn reached_invariant_region(&self) -> bool {
        self.entry_time.is_some()
    }
}

/// Step-by-step driver for one trajectory with event tracking.
#[derive(Debug, Clone)]
pub struct TrajectoryWatcher {
    h: f64,
    steps_taken: u64,
    time: f64,
    phases: Vec<f64>,
    scratch: Rk4Scratch,
    diffs: Vec<f64>,
    prev_abs: Vec<f64>,
    entry_times: Vec<f64>, // NAN = not yet entered
    outside: usize,
    entry_complete_at: Option<f64>,
    entered_this_step: bool,
    last_q: Option<i64>,
    q_changed_this_step: bool,
    q_timeline: Vec<(f64, i64)>,
    stabilization_time: f64,
    skipped_ill_defined: u64,
}

impl TrajectoryWatcher {
    pub fn new(initial: &RingState, h: f64) -> Self {
        assert!(h.is_finite() && h > 0.0, "step size must be finite and > 0");
        let n = initial.n();
        let phases = initial.phases().to_vec();
        let mut diffs = vec![0.0; n];
        diffs_from_phases(&phases, &mut diffs);

        let mut entry_times = vec![f64::NAN; n];
        let mut prev_abs = vec![0.0; n];
        let mut outside = 0;
        for (j, d) in diffs.iter().enumerate() {
            let a = d.abs();
            prev_abs[j] = a;
            if a < FRAC_PI_2 {
                entry_times[j] = 0.0;
            } else {
                outside += 1;
            }
        }

        let mut q_timeline = Vec::new();
        let last_q = winding_of_diffs(&diffs, WINDING_BRANCH_TOL).ok();
        if let Some(q) = last_q {
            q_timeline.push((0.0, q));
        }

        Self {
            h,
            steps_taken: 0,
            time: 0.0,
            scratch: Rk4Scratch::new(n),
            entry_complete_at: if outside == 0 { Some(0.0) } else { None },
            entered_this_step: false,
            q_changed_this_step: false,
            stabilization_time: 0.0,
            skipped_ill_defined: 0,
            phases,
            diffs,
            prev_abs,
            entry_times,
            outside,
            last_q,
            q_timeline,
        }
    }

    pub fn n(&self) -> usize {
        self.diffs.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Wrapped differences at the current step.
    pub fn diffs(&self) -> &[f64] {
        &self.diffs
    }

    pub fn in_invariant_region(&self) -> bool {
        self.outside == 0
    }

    /// True exactly on the step that completed entry into the invariant
    /// region.
    pub fn entered_this_step(&self) -> bool {
        self.entered_this_step
    }

    /// True exactly on a step where the sampled winding number changed.
    pub fn winding_changed_this_step(&self) -> bool {
        self.q_changed_this_step
    }

    pub fn last_winding(&self) -> Option<i64> {
        self.last_q
    }

    /// Interpolated entry time into the invariant region, if reached.
    pub fn entry_time(&self) -> Option<f64> {
        self.entry_complete_at
    }

    /// Coupling energy of the current state.
    pub fn energy(&self) -> f64 {
        crate::dynamics::energy_of_diffs(&self.diffs)
    }

    /// Time of the last observed winding change so far (0 if none).
    pub fn stabilization_time(&self) -> f64 {
        if self.q_timeline.len() > 1 {
            self.stabilization_time
        } else {
            0.0
        }
    }

    /// Advance one full step of size `h`.
    pub fn step(&mut self) {
        self.steps_taken += 1;
        let t = self.steps_taken as f64 * self.h;
        self.advance(self.h, t);
    }

    /// Advance one step of explicit size (used for a trailing partial step).
    fn advance(&mut self, dt: f64, t_after: f64) {
        let t_before = self.time;
        self.scratch.step(&mut self.phases, dt);
        diffs_from_phases(&self.phases, &mut self.diffs);
        self.time = t_after;
        self.entered_this_step = false;
        self.q_changed_this_step = false;

        // Per-coordinate first entries, interpolated within the step.
        if self.outside > 0 {
            for j in 0..self.diffs.len() {
                if self.entry_times[j].is_nan() {
                    let cur = self.diffs[j].abs();
                    if cur < FRAC_PI_2 {
                        let prev = self.prev_abs[j];
                        let frac = if prev > cur {
                            ((prev - FRAC_PI_2) / (prev - cur)).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        self.entry_times[j] = t_before + frac * dt;
                        self.outside -= 1;
                    }
                }
            }
            if self.outside == 0 {
                let te = self
                    .entry_times
                    .iter()
                    .fold(0.0f64, |m, t| m.max(*t));
                self.entry_complete_at = Some(te);
                self.entered_this_step = true;
            }
        }
        for (p, d) in self.prev_abs.iter_mut().zip(&self.diffs) {
            *p = d.abs();
        }

        // Winding sample; steps on the branch cut are tolerated and skipped.
        match winding_of_diffs(&self.diffs, WINDING_BRANCH_TOL) {
            Ok(q) => {
                if self.last_q.is_none() {
                    self.q_timeline.push((self.time, q));
                } else if self.last_q != Some(q) {
                    self.q_timeline.push((self.time, q));
                    self.stabilization_time = self.time;
                    self.q_changed_this_step = true;
                }
                self.last_q = Some(q);
            }
            Err(_) => self.skipped_ill_defined += 1,
        }
    }

    /// Run until `t_end` (trailing partial step included), or until entry
    /// into the invariant region plus `margin_steps` further steps when
    /// `stop_on_entry` is set.
    pub fn run(&mut self, t_end: f64, stop_on_entry: bool, margin_steps: u64) {
        assert!(t_end.is_finite() && t_end >= self.time);
        let total_full = (t_end / self.h + 1e-12).floor() as u64;
        let mut margin_left = margin_steps;
        while self.steps_taken < total_full {
            if stop_on_entry && self.outside == 0 {
                if margin_left == 0 {
                    return;
                }
                margin_left -= 1;
            }
            self.step();
        }
        if stop_on_entry && self.outside == 0 {
            return;
        }
        let remainder = t_end - total_full as f64 * self.h;
        if remainder > self.h * 1e-9 {
            self.advance(remainder, t_end);
        }
    }

    /// Current state as a value (normalizes a copy of the phase buffer).
    pub fn state(&self) -> RingState {
        RingState::from_normalized(self.phases.clone())
    }

    /// Number of steps whose winding sample sat on the branch cut.
    pub fn skipped_ill_defined(&self) -> u64 {
        self.skipped_ill_defined
    }

    /// Consume the watcher and summarize.
    pub fn finish(self) -> TrajectoryEvents {
        let state = RingState::from_normalized(self.phases);
        let converged = rhs_inf_norm(&state) < CONVERGENCE_GRAD_TOL;
        let final_winding = winding_of_diffs(&self.diffs, WINDING_BRANCH_TOL)
            .ok()
            .or(self.last_q);
        let stabilization_time = if self.q_timeline.len() > 1 {
            self.stabilization_time
        } else {
            0.0
        };
        TrajectoryEvents {
            stabilization_time,
            entry_time: self.entry_complete_at,
            entry_times: self
                .entry_times
                .iter()
                .map(|t| if t.is_nan() { None } else { Some(*t) })
                .collect(),
            final_winding,
            converged,
            q_timeline: self.q_timeline,
        }
    }
}

/// Integrate `initial` to `t_end` with step `h` and report the recorded
/// events. Deterministic: identical inputs produce bit-identical events.
pub fn watch_trajectory(initial: &RingState, h: f64, t_end: f64) -> TrajectoryEvents {
    let mut watcher = TrajectoryWatcher::new(initial, h);
    watcher.run(t_end, false, 0);
    watcher.finish()
}

/// Classify a state as a settled `q`-twisted attractor.
///
/// Returns `Some(q)` when the phase velocity ∞-norm is below `tol` and the
/// wrapped differences sit within `10·tol` of the constant `2πq/n` profile;
/// `None` means not converged (a sentinel, not an error).
pub fn classify_attractor(state: &RingState, tol: f64) -> Option<i64> {
    if rhs_inf_norm(state) >= tol {
        return None;
    }
    let diffs = state.to_diffs();
    let q = diffs.winding_number().ok()?;
    let gap = std::f64::consts::TAU * q as f64 / state.n() as f64;
    if diffs.diffs().iter().all(|d| (d - gap).abs() <= 10.0 * tol) {
        Some(q)
    } else {
        None
    }
}
