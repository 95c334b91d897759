//! Fixed-step integrators.
//!
//! The primary integrator is classical fourth-order Runge-Kutta on the
//! phases, chosen for determinism under seeding rather than step-size
//! economy. A forward Euler step on the wrapped differences is kept as a
//! separate mode solely for the discretization-error experiments.

use std::f64::consts::TAU;

use crate::dynamics::{diff_rhs_into, phase_rhs_into};
use crate::ring::{wrap_raw, PhaseDiffState, RingState};

/// Scratch buffers for repeated RK4 steps on one trajectory.
///
/// Reusing the buffers keeps the campaign hot loop allocation-free; the
/// stepper itself is stateless between calls.
#[derive(Debug, Clone)]
pub(crate) struct Rk4Scratch {
    sines: Vec<f64>,
    stage: Vec<f64>,
    k_cur: Vec<f64>,
    k_sum: Vec<f64>,
}

impl Rk4Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            sines: vec![0.0; n],
            stage: vec![0.0; n],
            k_cur: vec![0.0; n],
            k_sum: vec![0.0; n],
        }
    }

    /// Advance `phases` by one classical RK4 step of size `h`, then
    /// normalize every phase into `[0, 2π)`.
    pub(crate) fn step(&mut self, phases: &mut [f64], h: f64) {
        let n = phases.len();
        debug_assert_eq!(self.sines.len(), n);

        phase_rhs_into(phases, &mut self.sines, &mut self.k_cur);
        self.k_sum.copy_from_slice(&self.k_cur);
        for j in 0..n {
            self.stage[j] = phases[j] + 0.5 * h * self.k_cur[j];
        }

        phase_rhs_into(&self.stage, &mut self.sines, &mut self.k_cur);
        for j in 0..n {
            self.k_sum[j] += 2.0 * self.k_cur[j];
            self.stage[j] = phases[j] + 0.5 * h * self.k_cur[j];
        }

        phase_rhs_into(&self.stage, &mut self.sines, &mut self.k_cur);
        for j in 0..n {
            self.k_sum[j] += 2.0 * self.k_cur[j];
            self.stage[j] = phases[j] + h * self.k_cur[j];
        }

        phase_rhs_into(&self.stage, &mut self.sines, &mut self.k_cur);
        let w = h / 6.0;
        for j in 0..n {
            phases[j] = (phases[j] + w * (self.k_sum[j] + self.k_cur[j])).rem_euclid(TAU);
        }
    }
}

/// One classical RK4 step on the phase dynamics; the result is normalized
/// into `[0, 2π)`. `h = 0` returns the input unchanged.
pub fn rk4_step(state: &RingState, h: f64) -> RingState {
    assert!(h.is_finite() && h >= 0.0, "step size must be finite and ≥ 0");
    let mut phases = state.phases().to_vec();
    if h > 0.0 {
        Rk4Scratch::new(phases.len()).step(&mut phases, h);
    }
    RingState::from_normalized(phases)
}

/// One explicit Euler step on the difference dynamics, with every
/// coordinate wrapped back into `(−π, π]`. `h = 0` returns the input
/// unchanged.
pub fn euler_step(state: &PhaseDiffState, h: f64) -> PhaseDiffState {
    assert!(h.is_finite() && h >= 0.0, "step size must be finite and ≥ 0");
    let n = state.n();
    let mut sines = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diff_rhs_into(state.diffs(), &mut sines, &mut rhs);
    let diffs = state
        .diffs()
        .iter()
        .zip(&rhs)
        .map(|(d, v)| wrap_raw(d + h * v))
        .collect();
    PhaseDiffState::from_wrapped(diffs)
}

/// Euler iteration on a raw diff buffer (hot loop for the error experiments).
#[derive(Debug, Clone)]
pub(crate) struct EulerScratch {
    sines: Vec<f64>,
    rhs: Vec<f64>,
}

impl EulerScratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            sines: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub(crate) fn step(&mut self, diffs: &mut [f64], h: f64) {
        diff_rhs_into(diffs, &mut self.sines, &mut self.rhs);
        for (d, v) in diffs.iter_mut().zip(&self.rhs) {
            *d = wrap_raw(*d + h * v);
        }
    }
}

/// Integrate from `state` to `t_end` with fixed step `h`, invoking
/// `observer` after every step with the current time and state. The final
/// state is returned. A trailing partial step lands exactly on `t_end`
/// when `t_end` is not a multiple of `h`.
///
/// Errors returned by the observer abort the run and propagate.
pub fn integrate<F, E>(
    state: &RingState,
    h: f64,
    t_end: f64,
    mut observer: F,
) -> Result<RingState, E>
where
    F: FnMut(f64, &RingState) -> Result<(), E>,
{
    assert!(h.is_finite() && h > 0.0, "step size must be finite and > 0");
    assert!(
        t_end.is_finite() && t_end >= 0.0,
        "end time must be finite and ≥ 0"
    );
    let mut current = state.clone();
    let mut scratch = Rk4Scratch::new(current.n());
    let full_steps = (t_end / h + 1e-12).floor() as u64;
    for k in 1..=full_steps {
        scratch.step(current.phases_mut(), h);
        observer(k as f64 * h, &current)?;
    }
    let remainder = t_end - full_steps as f64 * h;
    if remainder > h * 1e-9 {
        scratch.step(current.phases_mut(), remainder);
        observer(t_end, &current)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{energy, energy_of_ring};
    use crate::ring::{twisted_state, RingState, TwistSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::convert::Infallible;

    fn random_state(n: usize, seed: u64) -> RingState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RingState::new((0..n).map(|_| rng.random_range(0.0..TAU)).collect()).unwrap()
    }

    fn max_abs_diff(a: &RingState, b: &RingState) -> f64 {
        a.phases()
            .iter()
            .zip(b.phases())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rk4_leaves_equilibria_unchanged() {
        let twist = twisted_state(&TwistSpec::new(10, 1, 0.2).unwrap());
        let stepped = rk4_step(&twist, 0.5);
        assert!(max_abs_diff(&twist, &stepped) < 1e-12);
    }

    #[test]
    fn rk4_one_step_error_shrinks_sixteenfold_when_h_halves() {
        // Richardson check: compare one step of h and two steps of h/2
        // against a fine-step proxy for the exact flow.
        let state = random_state(12, 3);
        let h = 0.2;
        let coarse = rk4_step(&state, h);
        let mut half = state.clone();
        for _ in 0..2 {
            half = rk4_step(&half, h / 2.0);
        }
        let mut reference = state.clone();
        for _ in 0..128 {
            reference = rk4_step(&reference, h / 128.0);
        }
        let err_h = max_abs_diff(&coarse, &reference);
        let err_half = max_abs_diff(&half, &reference);
        let ratio = err_h / err_half;
        assert!(
            (10.0..24.0).contains(&ratio),
            "order-4 local error should shrink ~16x, ratio {ratio}"
        );
    }

    #[test]
    fn rk4_energy_never_increases_at_moderate_steps() {
        for h in [0.1, 0.05, 0.01] {
            let mut state = random_state(16, 9);
            let mut prev = energy_of_ring(&state);
            for _ in 0..400 {
                state = rk4_step(&state, h);
                let e = energy_of_ring(&state);
                assert!(e <= prev + 1e-9, "h={h}: energy rose {prev} -> {e}");
                prev = e;
            }
        }
    }

    #[test]
    fn euler_identity_and_equilibrium() {
        let twist = twisted_state(&TwistSpec::new(8, 1, 0.0)
            .unwrap())
            .to_diffs();
        let stepped = euler_step(&twist, 0.3);
        for (a, b) in twist.diffs().iter().zip(stepped.diffs()) {
            assert!((a - b).abs() < 1e-12);
        }

        let state = random_state(9, 5).to_diffs();
        let frozen = euler_step(&state, 0.0);
        assert_eq!(state.diffs(), frozen.diffs());
    }

    #[test]
    fn integrate_zero_horizon_returns_input_untouched() {
        let state = random_state(8, 11);
        let mut calls = 0usize;
        let out = integrate(&state, 0.01, 0.0, |_, _| -> Result<(), Infallible> {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, 0);
        assert_eq!(state.phases(), out.phases());
    }

    #[test]
    fn integrate_keeps_sync_at_sync() {
        let sync = RingState::new(vec![0.7; 12]).unwrap();
        let out = integrate(&sync, 0.05, 3.0, |_, _| -> Result<(), Infallible> {
            Ok(())
        })
        .unwrap();
        assert!(max_abs_diff(&sync, &out) < 1e-12);
    }

    #[test]
    fn integrate_is_repeated_rk4() {
        let state = random_state(14, 21);
        let h = 0.02;
        let by_integrate =
            integrate(&state, h, 40.0 * h, |_, _| -> Result<(), Infallible> { Ok(()) }).unwrap();
        let mut by_steps = state;
        for _ in 0..40 {
            by_steps = rk4_step(&by_steps, h);
        }
        assert_eq!(by_integrate.phases(), by_steps.phases());
    }

    #[test]
    fn integrate_propagates_observer_errors() {
        let state = random_state(8, 2);
        let result = integrate(&state, 0.01, 1.0, |t, _| {
            if t > 0.05 {
                Err("stop")
            } else {
                Ok(())
            }
        });
        assert_eq!(result.unwrap_err(), "stop");
    }

    #[test]
    fn converges_to_a_twisted_state_template() {
        // Classify the terminal state against every stable twist template.
        // The slowest relaxation mode decays at rate ≈ 2(1 − cos(2π/n)), so
        // reaching a 1e-6 neighborhood at n=80 needs a few thousand time
        // units.
        let n = 80;
        let state = random_state(n, 7);
        let out = integrate(&state, 0.01, 3000.0, |_, _| -> Result<(), Infallible> {
            Ok(())
        })
        .unwrap();
        let diffs = out.to_diffs();
        let q = diffs.winding_number().unwrap();
        assert!(crate::ring::is_stable_twist(n, q), "landed on unstable q={q}");
        let gap = TAU * q as f64 / n as f64;
        let dev = diffs
            .diffs()
            .iter()
            .fold(0.0f64, |m, d| m.max((d - gap).abs()));
        assert!(dev < 1e-6, "final state {dev} away from q={q} template");
    }

    #[test]
    fn energy_decreases_along_euler_too() {
        let mut diffs = random_state(20, 31).to_diffs();
        let mut prev = energy(&diffs);
        for _ in 0..200 {
            diffs = euler_step(&diffs, 0.01);
            let e = energy(&diffs);
            assert!(e <= prev + 1e-6, "energy rose {prev} -> {e}");
            prev = e;
        }
    }
}
