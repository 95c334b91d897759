//! Euler-on-differences accuracy against the RK4 reference.
//!
//! For each trajectory the difference system is advanced with forward
//! Euler at each requested step size to the horizon `C·ln n`, and compared
//! coordinate-wise to an RK4 reference run at a much finer step. Reported
//! per step size: the circle-distance deviation (so a pair straddling the
//! ±π cut counts as close, not 2π apart) and the fraction of trajectories
//! whose winding number disagrees with the reference — branch-cut
//! crossings surface there instead.

use crate::error::Result;
use crate::experiments::driver::{run_chunked, trajectory_rng};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::{expect_campaign, Campaign, ExperimentConfig};
use crate::integrate::{EulerScratch, Rk4Scratch};
use crate::ring::{diffs_from_phases, winding_of_diffs, wrap_to_pi, WINDING_BRANCH_TOL};

#[derive(Debug, Clone, Copy)]
pub struct EulerRow {
    pub step_size: f64,
    /// Mean over trajectories of the max-over-coordinates deviation.
    pub mean_max_deviation: f64,
    /// Worst deviation seen across all trajectories.
    pub max_max_deviation: f64,
    /// Fraction of trajectories whose Euler winding number differs from
    /// the reference's at the horizon.
    pub winding_mismatch_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct EulerComparisonResult {
    pub rows: Vec<EulerRow>,
    /// Comparison horizon `horizon_log_factor · ln n`.
    pub horizon: f64,
    pub reference_step: f64,
    pub samples_used: u64,
    /// Trajectories skipped because the reference winding sat on the
    /// branch cut at the horizon.
    pub reference_ill_defined: u64,
}

pub fn run_euler_comparison(cfg: &ExperimentConfig) -> Result<EulerComparisonResult> {
    let (step_sizes, reference_step, horizon_log_factor) = expect_campaign(
        cfg,
        |c| match c {
            Campaign::EulerCompare {
                step_sizes,
                reference_step,
                horizon_log_factor,
            } => Some((step_sizes.clone(), *reference_step, *horizon_log_factor)),
            _ => None,
        },
        "euler_compare",
    )?;
    let horizon = horizon_log_factor * (cfg.n as f64).ln();

    #[derive(Clone)]
    struct PerStep {
        sum_dev: f64,
        max_dev: f64,
        mismatches: u64,
    }
    struct Partial {
        per_step: Vec<PerStep>,
        used: u64,
        ref_ill_defined: u64,
    }

    let partials = run_chunked(cfg.samples, |range| {
        let n = cfg.n;
        let mut rk4 = Rk4Scratch::new(n);
        let mut euler = EulerScratch::new(n);
        let mut ref_diffs = vec![0.0; n];
        let mut part = Partial {
            per_step: vec![
                PerStep {
                    sum_dev: 0.0,
                    max_dev: 0.0,
                    mismatches: 0,
                };
                step_sizes.len()
            ],
            used: 0,
            ref_ill_defined: 0,
        };
        for index in range {
            let mut rng = trajectory_rng(cfg.seed, index as u64);
            let initial = sample_initial_condition(n, &mut rng);
            let diffs0 = initial.to_diffs().into_diffs();

            // RK4 reference on the phases at the fine step.
            let mut phases = initial.into_phases();
            run_to(&mut phases, &mut rk4, reference_step, horizon);
            diffs_from_phases(&phases, &mut ref_diffs);
            let q_ref = match winding_of_diffs(&ref_diffs, WINDING_BRANCH_TOL) {
                Ok(q) => q,
                Err(_) => {
                    part.ref_ill_defined += 1;
                    continue;
                }
            };
            part.used += 1;

            for (slot, &h) in step_sizes.iter().enumerate() {
                let mut diffs = diffs0.clone();
                let full = (horizon / h + 1e-12).floor() as u64;
                for _ in 0..full {
                    euler.step(&mut diffs, h);
                }
                let rem = horizon - full as f64 * h;
                if rem > h * 1e-9 {
                    euler.step(&mut diffs, rem);
                }
                let mut dev = 0.0f64;
                for (a, b) in diffs.iter().zip(&ref_diffs) {
                    dev = dev.max(circle_distance(*a, *b));
                }
                let q_euler = winding_of_diffs(&diffs, WINDING_BRANCH_TOL).ok();
                let entry = &mut part.per_step[slot];
                entry.sum_dev += dev;
                entry.max_dev = entry.max_dev.max(dev);
                if q_euler != Some(q_ref) {
                    entry.mismatches += 1;
                }
            }
        }
        part
    });

    let mut per_step = vec![(0.0f64, 0.0f64, 0u64); step_sizes.len()];
    let mut used = 0;
    let mut ref_ill = 0;
    for part in partials {
        used += part.used;
        ref_ill += part.ref_ill_defined;
        for (acc, p) in per_step.iter_mut().zip(part.per_step) {
            acc.0 += p.sum_dev;
            acc.1 = acc.1.max(p.max_dev);
            acc.2 += p.mismatches;
        }
    }

    let rows = step_sizes
        .iter()
        .zip(per_step)
        .map(|(h, (sum_dev, max_dev, mismatches))| EulerRow {
            step_size: *h,
            mean_max_deviation: if used > 0 { sum_dev / used as f64 } else { f64::NAN },
            max_max_deviation: max_dev,
            winding_mismatch_fraction: if used > 0 {
                mismatches as f64 / used as f64
            } else {
                f64::NAN
            },
        })
        .collect();

    Ok(EulerComparisonResult {
        rows,
        horizon,
        reference_step,
        samples_used: used,
        reference_ill_defined: ref_ill,
    })
}

fn run_to(phases: &mut [f64], scratch: &mut Rk4Scratch, h: f64, t_end: f64) {
    let full = (t_end / h + 1e-12).floor() as u64;
    for _ in 0..full {
        scratch.step(phases, h);
    }
    let rem = t_end - full as f64 * h;
    if rem > h * 1e-9 {
        scratch.step(phases, rem);
    }
}

/// Shortest angular distance between two wrapped values.
fn circle_distance(a: f64, b: f64) -> f64 {
    wrap_to_pi(a - b).expect("finite angles").abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_shrinks_with_the_step() {
        // Short horizon: long horizons amplify trajectory divergence near
        // unstable transients and saturate the error curve.
        let cfg = ExperimentConfig {
            n: 24,
            samples: 30,
            h: 0.01,
            t_end: 50.0,
            seed: 4,
            campaign: Campaign::EulerCompare {
                step_sizes: vec![0.1, 0.05, 0.02, 0.01],
                reference_step: 1e-3,
                horizon_log_factor: 0.75,
            },
        };
        let out = run_euler_comparison(&cfg).unwrap();
        assert_eq!(out.samples_used, 30);
        for pair in out.rows.windows(2) {
            assert!(
                pair[1].mean_max_deviation < pair[0].mean_max_deviation,
                "error should shrink: h={} gives {}, h={} gives {}",
                pair[0].step_size,
                pair[0].mean_max_deviation,
                pair[1].step_size,
                pair[1].mean_max_deviation
            );
        }
        // halving h roughly halves the first-order global error
        let e_01 = out.rows[0].mean_max_deviation;
        let e_005 = out.rows[1].mean_max_deviation;
        let ratio = e_01 / e_005;
        assert!(
            (1.5..3.0).contains(&ratio),
            "first-order halving ratio {ratio}"
        );
    }

    #[test]
    fn mismatch_rate_does_not_grow_as_h_shrinks() {
        let cfg = ExperimentConfig {
            n: 40,
            samples: 60,
            h: 0.01,
            t_end: 50.0,
            seed: 12,
            campaign: Campaign::EulerCompare {
                step_sizes: vec![0.1, 0.01],
                reference_step: 1e-3,
                horizon_log_factor: 1.5,
            },
        };
        let out = run_euler_comparison(&cfg).unwrap();
        let coarse = out.rows[0].winding_mismatch_fraction;
        let fine = out.rows[1].winding_mismatch_fraction;
        assert!(fine <= coarse, "mismatch rate rose from {coarse} to {fine}");
    }
}
