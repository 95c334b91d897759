//! Right-hand sides and energy for nearest-neighbor sine coupling.
//!
//! In phase coordinates the velocity of oscillator `j` is
//! `sin(θ_{j+1} − θ_j) + sin(θ_{j−1} − θ_j)` with periodic indices; in diff
//! coordinates this becomes the discrete Laplacian of `sin`,
//! `sin(η_{j+1}) − 2 sin(η_j) + sin(η_{j−1})`. The system is a gradient
//! flow of [`energy`], so [`energy_gradient`] is exactly the negated phase
//! velocity; the unit tests check that identity against finite differences
//! rather than assuming it.

use crate::ring::{PhaseDiffState, RingState};

/// Phase velocity of every oscillator: component `j` is
/// `sin(θ_{j+1} − θ_j) + sin(θ_{j−1} − θ_j)`.
///
/// The coupling is pairwise antisymmetric, so the components sum to zero.
pub fn phase_rhs(state: &RingState) -> Vec<f64> {
    let n = state.n();
    let mut sines = vec![0.0; n];
    let mut out = vec![0.0; n];
    phase_rhs_into(state.phases(), &mut sines, &mut out);
    out
}

/// Velocity of the wrapped differences: component `j` is
/// `sin(η_{j+1}) − 2 sin(η_j) + sin(η_{j−1})`.
///
/// Equal to the chain rule applied to the neighbor differences of
/// [`phase_rhs`]; components sum to zero.
pub fn diff_rhs(state: &PhaseDiffState) -> Vec<f64> {
    let n = state.n();
    let mut sines = vec![0.0; n];
    let mut out = vec![0.0; n];
    diff_rhs_into(state.diffs(), &mut sines, &mut out);
    out
}

/// Coupling energy `E = n − Σ_j cos(η_j)`.
///
/// Zero exactly at sync, at most `2n` (every gap at π).
pub fn energy(state: &PhaseDiffState) -> f64 {
    energy_of_diffs(state.diffs())
}

/// Energy as a function of the phases (convenience for gradient checks).
pub fn energy_of_ring(state: &RingState) -> f64 {
    energy(&state.to_diffs())
}

/// Gradient of the energy with respect to the phases.
///
/// For this system the gradient is the negated [`phase_rhs`]; the dynamics
/// descend the energy.
pub fn energy_gradient(state: &RingState) -> Vec<f64> {
    let mut g = phase_rhs(state);
    for v in &mut g {
        *v = -*v;
    }
    g
}

/// ∞-norm of the phase velocity; the convergence functional used to
/// declare a state an equilibrium.
pub fn rhs_inf_norm(state: &RingState) -> f64 {
    phase_rhs(state).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `out[j] = sin(θ_{j+1} − θ_j) + sin(θ_{j−1} − θ_j)` on raw buffers.
///
/// `sines` is scratch for the `n` neighbor-gap sines; the arguments are raw
/// differences (no wrap needed, sine is 2π-periodic).
#[inline]
pub(crate) fn phase_rhs_into(phases: &[f64], sines: &mut [f64], out: &mut [f64]) {
    let n = phases.len();
    for j in 0..n - 1 {
        sines[j] = (phases[j + 1] - phases[j]).sin();
    }
    sines[n - 1] = (phases[0] - phases[n - 1]).sin();
    out[0] = sines[0] - sines[n - 1];
    for j in 1..n {
        out[j] = sines[j] - sines[j - 1];
    }
}

/// `out[j] = sin(η_{j+1}) − 2 sin(η_j) + sin(η_{j−1})` on raw buffers.
#[inline]
pub(crate) fn diff_rhs_into(diffs: &[f64], sines: &mut [f64], out: &mut [f64]) {
    let n = diffs.len();
    for j in 0..n {
        sines[j] = diffs[j].sin();
    }
    out[0] = sines[1] - 2.0 * sines[0] + sines[n - 1];
    for j in 1..n - 1 {
        out[j] = sines[j + 1] - 2.0 * sines[j] + sines[j - 1];
    }
    out[n - 1] = sines[0] - 2.0 * sines[n - 1] + sines[n - 2];
}

#[inline]
pub(crate) fn energy_of_diffs(diffs: &[f64]) -> f64 {
    let cos_sum: f64 = diffs.iter().map(|d| d.cos()).sum();
    diffs.len() as f64 - cos_sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{twisted_state, PhaseDiffState, RingState, TwistSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn random_state(n: usize, seed: u64) -> RingState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RingState::new((0..n).map(|_| rng.random_range(0.0..TAU)).collect()).unwrap()
    }

    #[test]
    fn sync_is_an_equilibrium() {
        let state = RingState::new(vec![0.4; 7]).unwrap();
        assert!(phase_rhs(&state).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn stable_twists_are_equilibria() {
        for (n, q) in [(8, 1), (40, 3), (13, 2)] {
            let state = twisted_state(&TwistSpec::new(n, q, 0.3).unwrap());
            for v in phase_rhs(&state) {
                assert!(v.abs() < 1e-13, "n={n} q={q}: rhs component {v}");
            }
        }
    }

    #[test]
    fn phase_rhs_matches_direct_evaluation() {
        // n=3, θ = (0, π/2, π): components (1, 0, −1).
        let state = RingState::new(vec![0.0, PI / 2.0, PI]).unwrap();
        let rhs = phase_rhs(&state);
        assert!((rhs[0] - 1.0).abs() < 1e-15);
        assert!(rhs[1].abs() < 1e-15);
        assert!((rhs[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_rhs_components_sum_to_zero() {
        for seed in 0..20 {
            let state = random_state(4 + (seed as usize % 60), seed);
            let sum: f64 = phase_rhs(&state).iter().sum();
            assert!(sum.abs() <= 1e-12 * state.n() as f64, "sum {sum}");
        }
    }

    #[test]
    fn constant_diff_profile_is_annihilated() {
        let diffs = PhaseDiffState::new(vec![PI / 4.0; 8]).unwrap();
        assert!(diff_rhs(&diffs).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn all_half_pi_profile_is_an_equilibrium() {
        // The all-π/2 profile is the unstable equilibrium separating the
        // invariant region from the rest of diff space.
        let diffs = PhaseDiffState::new(vec![FRAC_PI_2; 8]).unwrap();
        assert!(diff_rhs(&diffs).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn diff_rhs_matches_independent_stencil() {
        // Frozen output of an independent evaluation of
        // sin(η_{j+1}) − 2 sin(η_j) + sin(η_{j−1}) for η = (0.5, 0, 0, −0.5).
        let diffs = PhaseDiffState::new(vec![0.5, 0.0, 0.0, -0.5]).unwrap();
        let expected = [
            -1.438276615812609,
            0.47942553860420301,
            -0.47942553860420301,
            1.438276615812609,
        ];
        for (got, want) in diff_rhs(&diffs).iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "got {got}, want {want}");
        }
    }

    #[test]
    fn energy_trivial_values() {
        let sync = RingState::new(vec![2.0; 6]).unwrap();
        assert_eq!(energy(&sync.to_diffs()), 0.0);

        let anti = PhaseDiffState::new(vec![PI; 6]).unwrap();
        assert!((energy(&anti) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn energy_of_single_twist_matches_closed_form() {
        // 8·(1 − cos(π/4)), evaluated independently.
        let state = twisted_state(&TwistSpec::new(8, 1, 0.0).unwrap());
        let e = energy(&state.to_diffs());
        assert!((e - 2.3431457505076194).abs() < 1e-12, "e = {e}");
    }

    #[test]
    fn gradient_vanishes_at_equilibria() {
        let sync = RingState::new(vec![1.0; 9]).unwrap();
        assert!(energy_gradient(&sync).iter().all(|g| *g == 0.0));
        let twist = twisted_state(&TwistSpec::new(12, 2, 0.0).unwrap());
        assert!(energy_gradient(&twist).iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // Central finite differences of the energy, the independent oracle
        // for the gradient-flow identity.
        let fd_step = 1e-6;
        let state = random_state(10, 42);
        let grad = energy_gradient(&state);
        let base = state.phases().to_vec();
        for j in 0..state.n() {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[j] += fd_step;
            minus[j] -= fd_step;
            let ep = energy_of_ring(&RingState::new(plus).unwrap());
            let em = energy_of_ring(&RingState::new(minus).unwrap());
            let fd = (ep - em) / (2.0 * fd_step);
            assert!(
                (fd - grad[j]).abs() <= 1e-5 * grad[j].abs().max(1.0),
                "component {j}: fd {fd} vs grad {}",
                grad[j]
            );
        }
    }
}
