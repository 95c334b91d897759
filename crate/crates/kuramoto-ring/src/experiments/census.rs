//! Final-winding census: the basin-size estimator.
//!
//! Basin sizes are estimated as final-winding frequencies under i.i.d.
//! uniform random initial phases — frequency *is* the basin's probability
//! under that measure. A trajectory's final winding is read as soon as it
//! enters the invariant region (plus one classification step): the winding
//! number is frozen there, which cuts the cost of a census by roughly an
//! order of magnitude compared to integrating to an equilibrium. The
//! early-stop soundness is tested against full integration in the
//! integration test suite, not assumed.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::driver::{run_chunked, trajectory_rng};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::{expect_campaign, Campaign, ExperimentConfig};
use crate::integrate::Rk4Scratch;
use crate::ring::{all_gaps_inside, diffs_from_phases, winding_of_diffs, WINDING_BRANCH_TOL};
use crate::stats::{fit_linear, moments_from_counts, SampleMoments};

/// One scaling-law fit of `ln p(q)` against a transform of `q`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    /// Decay coefficient (`k` in `p ∝ e^{−k·x}` for the fitted `x`).
    pub decay: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    /// Weighted residual sum of squares (Poisson weights = counts).
    pub residual_ss: f64,
    /// Akaike information criterion under the weighted-Gaussian surrogate.
    pub aic: f64,
    pub n_points: usize,
}

/// Census of final winding numbers with the two competing scaling fits.
#[derive(Debug, Clone)]
pub struct BasinCensus {
    pub counts: BTreeMap<i64, u64>,
    pub total: u64,
    /// Trajectories that never entered the invariant region by `t_end`
    /// (or, vanishingly rarely, classified onto the branch cut).
    pub not_converged: u64,
    /// Fit of `ln p(q)` against `q²` over `|q| ≤ fit_max_abs_q`.
    pub gaussian_fit: Option<ScalingFit>,
    /// Fit of `ln p(q)` against `|q|` over the same points.
    pub exponential_fit: Option<ScalingFit>,
    pub fit_max_abs_q: i64,
}

impl BasinCensus {
    pub fn converged(&self) -> u64 {
        self.total - self.not_converged
    }

    /// A census is reported invalid when more than 1% of trajectories
    /// failed to classify.
    pub fn is_valid(&self) -> bool {
        self.not_converged as f64 <= 0.01 * self.total as f64
    }

    /// Estimated basin probability of the `q`-twisted state.
    pub fn probability(&self, q: i64) -> f64 {
        if self.converged() == 0 {
            return 0.0;
        }
        *self.counts.get(&q).unwrap_or(&0) as f64 / self.converged() as f64
    }

    pub fn moments(&self) -> Option<SampleMoments> {
        moments_from_counts(&self.counts)
    }
}

struct Partial {
    counts: BTreeMap<i64, u64>,
    not_converged: u64,
}

pub fn run_basin_census(cfg: &ExperimentConfig) -> Result<BasinCensus> {
    let fit_max_abs_q = expect_campaign(
        cfg,
        |c| match c {
            Campaign::BasinCensus { fit_max_abs_q } => Some(*fit_max_abs_q),
            _ => None,
        },
        "basin_census",
    )?;

    let max_steps = (cfg.t_end / cfg.h + 1e-12).floor() as u64;
    let partials = run_chunked(cfg.samples, |range| {
        let mut scratch = Rk4Scratch::new(cfg.n);
        let mut diffs = vec![0.0; cfg.n];
        let mut part = Partial {
            counts: BTreeMap::new(),
            not_converged: 0,
        };
        for index in range {
            let mut rng = trajectory_rng(cfg.seed, index as u64);
            let mut phases = sample_initial_condition(cfg.n, &mut rng).into_phases();
            let mut entered = all_gaps_inside(&phases);
            let mut steps = 0;
            while !entered && steps < max_steps {
                scratch.step(&mut phases, cfg.h);
                steps += 1;
                entered = all_gaps_inside(&phases);
            }
            if !entered {
                part.not_converged += 1;
                continue;
            }
            // One further step as classification margin, then read the
            // frozen winding number.
            scratch.step(&mut phases, cfg.h);
            diffs_from_phases(&phases, &mut diffs);
            match winding_of_diffs(&diffs, WINDING_BRANCH_TOL) {
                Ok(q) => *part.counts.entry(q).or_insert(0) += 1,
                Err(_) => part.not_converged += 1,
            }
        }
        part
    });

    let mut counts = BTreeMap::new();
    let mut not_converged = 0;
    for part in partials {
        for (q, c) in part.counts {
            *counts.entry(q).or_insert(0) += c;
        }
        not_converged += part.not_converged;
    }

    let converged: u64 = counts.values().sum();
    let (gaussian_fit, exponential_fit) = scaling_fits(&counts, converged, fit_max_abs_q);
    Ok(BasinCensus {
        counts,
        total: cfg.samples as u64,
        not_converged,
        gaussian_fit,
        exponential_fit,
        fit_max_abs_q,
    })
}

/// Weighted fits of `ln p(q)` against `q²` and `|q|` over the populated
/// bins with `|q| ≤ fit_max_abs_q`. Poisson weights (the counts) keep
/// sparsely-hit bins from dominating; both models see identical points and
/// weights so their residuals are directly comparable.
fn scaling_fits(
    counts: &BTreeMap<i64, u64>,
    converged: u64,
    fit_max_abs_q: i64,
) -> (Option<ScalingFit>, Option<ScalingFit>) {
    if converged == 0 {
        return (None, None);
    }
    let mut x_sq = Vec::new();
    let mut x_abs = Vec::new();
    let mut log_p = Vec::new();
    let mut weights = Vec::new();
    for (q, c) in counts {
        if q.abs() > fit_max_abs_q || *c == 0 {
            continue;
        }
        x_sq.push((q * q) as f64);
        x_abs.push(q.abs() as f64);
        log_p.push((*c as f64 / converged as f64).ln());
        weights.push(*c as f64);
    }
    let build = |x: &[f64]| -> Option<ScalingFit> {
        let fit = fit_linear(x, &log_p, Some(&weights)).ok()?;
        Some(ScalingFit {
            decay: -fit.slope,
            log_prefactor: fit.intercept,
            r_squared: fit.r_squared,
            residual_ss: fit.residual_ss,
            aic: aic_gaussian(fit.residual_ss, fit.n_points, 2),
            n_points: fit.n_points,
        })
    };
    (build(&x_sq), build(&x_abs))
}

fn aic_gaussian(rss: f64, n_points: usize, n_params: usize) -> f64 {
    let n = n_points as f64;
    n * (rss.max(f64::MIN_POSITIVE) / n).ln() + 2.0 * n_params as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn census_cfg(n: usize, samples: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            n,
            samples,
            h: 0.01,
            t_end: 50.0,
            seed,
            campaign: Campaign::BasinCensus { fit_max_abs_q: 4 },
        }
    }

    #[test]
    fn four_ring_only_reaches_sync() {
        // n = 4 has no stable twists besides sync, so every trajectory
        // lands on q = 0.
        let census = run_basin_census(&census_cfg(4, 400, 11)).unwrap();
        assert_eq!(census.not_converged, 0);
        assert_eq!(census.counts.len(), 1);
        assert_eq!(census.counts[&0], 400);
    }

    #[test]
    fn counts_stay_inside_stable_range() {
        let n = 20;
        let census = run_basin_census(&census_cfg(n, 500, 3)).unwrap();
        assert!(census.is_valid());
        for q in census.counts.keys() {
            assert!(
                crate::ring::is_stable_twist(n, *q),
                "census hit unstable twist q = {q}"
            );
        }
        assert_eq!(
            census.counts.values().sum::<u64>() + census.not_converged,
            census.total
        );
    }

    #[test]
    fn sync_dominates_small_rings() {
        let census = run_basin_census(&census_cfg(12, 800, 5)).unwrap();
        let p0 = census.probability(0);
        for q in [-2i64, -1, 1, 2] {
            assert!(census.probability(q) < p0, "p({q}) ≥ p(0)");
        }
    }

    #[test]
    fn census_is_reproducible() {
        let a = run_basin_census(&census_cfg(16, 300, 9)).unwrap();
        let b = run_basin_census(&census_cfg(16, 300, 9)).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.not_converged, b.not_converged);
    }

    #[test]
    fn kind_mismatch_is_a_config_error() {
        let mut cfg = census_cfg(16, 10, 1);
        cfg.campaign = Campaign::EntryTimes;
        assert!(run_basin_census(&cfg).is_err());
    }
}
