//! Winding-number distribution at checkpoint times.
//!
//! Each trajectory's winding number is read at every checkpoint and, when
//! requested, once more after the trajectory has entered the invariant
//! region — inside it the winding number is frozen, so that sample is the
//! settled ("converged") value and any checkpoints later than the entry
//! can be filled with it without further integration.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::experiments::driver::{run_chunked, trajectory_rng};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::{expect_campaign, Campaign, ExperimentConfig};
use crate::integrate::Rk4Scratch;
use crate::ring::{all_inside_half_pi, diffs_from_phases, winding_of_diffs, WINDING_BRANCH_TOL};
use crate::stats::moments_from_counts;

/// Winding histogram and moments at one checkpoint.
#[derive(Debug, Clone)]
pub struct CheckpointStats {
    /// Checkpoint time; `None` marks the settled distribution.
    pub time: Option<f64>,
    pub histogram: BTreeMap<i64, u64>,
    pub samples: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone)]
pub struct QDistributionResult {
    pub checkpoints: Vec<CheckpointStats>,
    /// Checkpoint samples whose winding sat on the branch cut and were
    /// re-read one step later.
    pub resampled: u64,
    /// Checkpoint samples unavailable even after the one-step retry.
    pub dropped: u64,
    /// Trajectories that never entered the invariant region by `t_end`
    /// (excluded from the settled histogram only).
    pub not_converged: u64,
    pub total: u64,
}

struct Partial {
    histograms: Vec<BTreeMap<i64, u64>>,
    converged: BTreeMap<i64, u64>,
    resampled: u64,
    dropped: u64,
    not_converged: u64,
}

pub fn run_q_distribution(cfg: &ExperimentConfig) -> Result<QDistributionResult> {
    let (checkpoints, include_converged) = expect_campaign(
        cfg,
        |c| match c {
            Campaign::QDistribution {
                checkpoints,
                include_converged,
            } => Some((checkpoints.clone(), *include_converged)),
            _ => None,
        },
        "q_distribution",
    )?;
    let mut times = checkpoints;
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Checkpoint i is sampled at the first step with k·h ≥ t_i.
    let steps: Vec<u64> = times
        .iter()
        .map(|t| (t / cfg.h - 1e-9).ceil().max(0.0) as u64)
        .collect();
    let max_steps = (cfg.t_end / cfg.h + 1e-12).floor() as u64;

    let partials = run_chunked(cfg.samples, |range| {
        let mut scratch = Rk4Scratch::new(cfg.n);
        let mut diffs = vec![0.0; cfg.n];
        let mut part = Partial {
            histograms: vec![BTreeMap::new(); times.len()],
            converged: BTreeMap::new(),
            resampled: 0,
            dropped: 0,
            not_converged: 0,
        };
        for index in range {
            let mut rng = trajectory_rng(cfg.seed, index as u64);
            let mut phases = sample_initial_condition(cfg.n, &mut rng).into_phases();
            diffs_from_phases(&phases, &mut diffs);

            let mut values: Vec<Option<i64>> = vec![None; times.len()];
            let mut retry: Vec<usize> = Vec::new();
            let mut next_cp = 0usize;
            let mut entered = all_inside_half_pi(&diffs);
            let mut frozen: Option<i64> = None;
            let mut k = 0u64;

            loop {
                if !retry.is_empty() {
                    let q = winding_of_diffs(&diffs, WINDING_BRANCH_TOL).ok();
                    for cp in retry.drain(..) {
                        match q {
                            Some(v) => values[cp] = Some(v),
                            None => part.dropped += 1,
                        }
                    }
                }
                while next_cp < times.len() && steps[next_cp] == k {
                    match winding_of_diffs(&diffs, WINDING_BRANCH_TOL) {
                        Ok(q) => values[next_cp] = Some(q),
                        Err(_) => {
                            part.resampled += 1;
                            retry.push(next_cp);
                        }
                    }
                    next_cp += 1;
                }
                if entered && frozen.is_none() {
                    // Inside the region no difference is near ±π, so the
                    // winding sample cannot fail.
                    frozen = winding_of_diffs(&diffs, WINDING_BRANCH_TOL).ok();
                }
                if let Some(q) = frozen {
                    // Remaining checkpoints see the frozen value.
                    for cp in next_cp..times.len() {
                        values[cp] = Some(q);
                    }
                    for cp in retry.drain(..) {
                        values[cp] = Some(q);
                    }
                    next_cp = times.len();
                }
                let done_checkpoints = next_cp >= times.len() && retry.is_empty();
                let done_converged = !include_converged || frozen.is_some();
                if (done_checkpoints && done_converged) || k >= max_steps {
                    break;
                }
                scratch.step(&mut phases, cfg.h);
                k += 1;
                diffs_from_phases(&phases, &mut diffs);
                entered = entered || all_inside_half_pi(&diffs);
            }

            for (cp, v) in values.iter().enumerate() {
                match v {
                    Some(q) => *part.histograms[cp].entry(*q).or_insert(0) += 1,
                    None => part.dropped += 1,
                }
            }
            if include_converged {
                match frozen {
                    Some(q) => *part.converged.entry(q).or_insert(0) += 1,
                    None => part.not_converged += 1,
                }
            }
        }
        part
    });

    let mut histograms = vec![BTreeMap::new(); times.len()];
    let mut converged = BTreeMap::new();
    let (mut resampled, mut dropped, mut not_converged) = (0, 0, 0);
    for part in partials {
        for (into, from) in histograms.iter_mut().zip(part.histograms) {
            merge_counts(into, from);
        }
        merge_counts(&mut converged, part.converged);
        resampled += part.resampled;
        dropped += part.dropped;
        not_converged += part.not_converged;
    }

    let mut stats: Vec<CheckpointStats> = times
        .iter()
        .zip(histograms)
        .map(|(t, hist)| checkpoint_stats(Some(*t), hist))
        .collect();
    if include_converged {
        stats.push(checkpoint_stats(None, converged));
    }
    Ok(QDistributionResult {
        checkpoints: stats,
        resampled,
        dropped,
        not_converged,
        total: cfg.samples as u64,
    })
}

fn merge_counts(into: &mut BTreeMap<i64, u64>, from: BTreeMap<i64, u64>) {
    for (q, c) in from {
        *into.entry(q).or_insert(0) += c;
    }
}

fn checkpoint_stats(time: Option<f64>, histogram: BTreeMap<i64, u64>) -> CheckpointStats {
    let samples: u64 = histogram.values().sum();
    let m = moments_from_counts(&histogram);
    CheckpointStats {
        time,
        samples,
        mean: m.map_or(f64::NAN, |m| m.mean),
        variance: m.map_or(f64::NAN, |m| m.variance),
        skewness: m.map_or(f64::NAN, |m| m.skewness),
        excess_kurtosis: m.map_or(f64::NAN, |m| m.excess_kurtosis),
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, samples: usize, checkpoints: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            n,
            samples,
            h: 0.01,
            t_end: 50.0,
            seed: 2024,
            campaign: Campaign::QDistribution {
                checkpoints,
                include_converged: true,
            },
        }
    }

    #[test]
    fn small_ring_settles_onto_stable_twists_only() {
        // n = 5: stable twists are |q| < 5/4, so the settled distribution
        // puts all mass in {−1, 0, 1}. (At t = 0 the partial-sum winding
        // can still reach ±2.)
        let out = run_q_distribution(&cfg(5, 500, vec![0.0])).unwrap();
        let settled = out.checkpoints.last().unwrap();
        assert!(settled.time.is_none());
        for q in settled.histogram.keys() {
            assert!(q.abs() <= 1, "settled q = {q} out of stable range");
        }
    }

    #[test]
    fn variance_decreases_from_start_to_settled() {
        let out = run_q_distribution(&cfg(64, 600, vec![0.0, 1.0])).unwrap();
        let t0 = &out.checkpoints[0];
        let settled = out.checkpoints.last().unwrap();
        assert!(settled.time.is_none());
        assert!(
            settled.variance < t0.variance,
            "variance should shrink: {} -> {}",
            t0.variance,
            settled.variance
        );
        assert_eq!(out.not_converged, 0);
        // every checkpoint histogram holds every classified trajectory
        assert_eq!(t0.samples, 600);
    }

    #[test]
    fn initial_variance_tracks_uniform_prediction() {
        let out = run_q_distribution(&cfg(160, 2000, vec![0.0])).unwrap();
        let t0 = &out.checkpoints[0];
        let expected = 159.0 / 12.0;
        assert!(
            (t0.variance - expected).abs() < 0.1 * expected,
            "t=0 variance {} vs {expected}",
            t0.variance
        );
    }
}
