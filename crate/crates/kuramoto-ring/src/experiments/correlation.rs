//! Distance-resolved correlation between phase differences.
//!
//! For every trajectory the wrapped differences are snapshotted at two
//! events: the last winding-number change (stabilization) and the entry
//! into the invariant region. Across trajectories the Pearson correlation
//! between coordinates a fixed index distance apart is then computed two
//! ways — at one fixed reference index, and averaged over all reference
//! indices — and both are reported; the averaged variant is the headline
//! number since it uses every coordinate.
//!
//! The reported noise band is the expected |r| of two independent
//! length-`n` uniform vectors, `√2/(√π·√(n−1))`, the same yardstick the
//! distance curves are judged against.

use serde::Serialize;

use crate::error::Result;
use crate::experiments::driver::{run_chunked, trajectory_rng};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::{expect_campaign, Campaign, ExperimentConfig};
use crate::monitors::TrajectoryWatcher;
use crate::stats::uniform_noise_band;

/// Which per-trajectory event a correlation row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Last winding-number change.
    Stabilization,
    /// Entry into the invariant region.
    Entry,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Stabilization => "stabilization",
            EventKind::Entry => "entry",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CorrelationRow {
    pub event: EventKind,
    pub distance: usize,
    /// Correlation across trajectories at the fixed reference index.
    pub r_fixed: f64,
    /// Mean over all reference indices of the per-index correlation.
    pub r_averaged: f64,
}

#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub rows: Vec<CorrelationRow>,
    pub noise_band: f64,
    pub fixed_index: usize,
    pub used: u64,
    pub excluded: u64,
}

/// Per-event sufficient statistics across trajectories.
struct EventAccum {
    count: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    /// `sum_cross[d][i] = Σ x_i · x_{(i+d) mod n}`
    sum_cross: Vec<Vec<f64>>,
}

impl EventAccum {
    fn new(n: usize, distances: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; n],
            sum_sq: vec![0.0; n],
            sum_cross: vec![vec![0.0; n]; distances],
        }
    }

    fn add(&mut self, diffs: &[f64], distances: &[usize]) {
        let n = diffs.len();
        self.count += 1;
        for (i, x) in diffs.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
        for (slot, d) in distances.iter().enumerate() {
            let cross = &mut self.sum_cross[slot];
            for i in 0..n {
                let j = if i + d < n { i + d } else { i + d - n };
                cross[i] += diffs[i] * diffs[j];
            }
        }
    }

    fn merge(&mut self, other: &EventAccum) {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        for (a, b) in self.sum_cross.iter_mut().zip(&other.sum_cross) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn correlation(&self, i: usize, slot: usize, d: usize) -> Option<f64> {
        let n = self.sum.len();
        let j = (i + d) % n;
        let c = self.count as f64;
        let cov = c * self.sum_cross[slot][i] - self.sum[i] * self.sum[j];
        let var_i = c * self.sum_sq[i] - self.sum[i] * self.sum[i];
        let var_j = c * self.sum_sq[j] - self.sum[j] * self.sum[j];
        if var_i <= 0.0 || var_j <= 0.0 {
            return None;
        }
        Some(cov / (var_i * var_j).sqrt())
    }
}

pub fn run_correlation_probe(cfg: &ExperimentConfig) -> Result<CorrelationResult> {
    let (distances, fixed_index) = expect_campaign(
        cfg,
        |c| match c {
            Campaign::CorrelationProbe {
                distances,
                fixed_index,
            } => Some((distances.clone(), *fixed_index)),
            _ => None,
        },
        "correlation_probe",
    )?;

    let n = cfg.n;
    let max_steps = (cfg.t_end / cfg.h + 1e-12).floor() as u64;
    struct Partial {
        stabilization: EventAccum,
        entry: EventAccum,
        excluded: u64,
    }

    let partials = run_chunked(cfg.samples, |range| {
        let mut part = Partial {
            stabilization: EventAccum::new(n, distances.len()),
            entry: EventAccum::new(n, distances.len()),
            excluded: 0,
        };
        let mut snap_stab = vec![0.0; n];
        for index in range {
            let mut rng = trajectory_rng(cfg.seed, index as u64);
            let initial = sample_initial_condition(n, &mut rng);
            let mut watcher = TrajectoryWatcher::new(&initial, cfg.h);
            snap_stab.copy_from_slice(watcher.diffs());
            let mut entered = watcher.in_invariant_region();
            if !entered {
                for _ in 0..max_steps {
                    watcher.step();
                    if watcher.winding_changed_this_step() {
                        snap_stab.copy_from_slice(watcher.diffs());
                    }
                    if watcher.entered_this_step() {
                        entered = true;
                        break;
                    }
                }
            }
            if !entered {
                part.excluded += 1;
                continue;
            }
            part.stabilization.add(&snap_stab, &distances);
            part.entry.add(watcher.diffs(), &distances);
        }
        part
    });

    let mut stabilization = EventAccum::new(n, distances.len());
    let mut entry = EventAccum::new(n, distances.len());
    let mut excluded = 0;
    for part in &partials {
        stabilization.merge(&part.stabilization);
        entry.merge(&part.entry);
        excluded += part.excluded;
    }

    let mut rows = Vec::with_capacity(2 * distances.len());
    for (event, acc) in [
        (EventKind::Stabilization, &stabilization),
        (EventKind::Entry, &entry),
    ] {
        for (slot, &d) in distances.iter().enumerate() {
            let r_fixed = acc.correlation(fixed_index, slot, d).unwrap_or(f64::NAN);
            let mut sum = 0.0;
            let mut used = 0usize;
            for i in 0..n {
                if let Some(r) = acc.correlation(i, slot, d) {
                    sum += r;
                    used += 1;
                }
            }
            let r_averaged = if used > 0 { sum / used as f64 } else { f64::NAN };
            rows.push(CorrelationRow {
                event,
                distance: d,
                r_fixed,
                r_averaged,
            });
        }
    }

    Ok(CorrelationResult {
        rows,
        noise_band: uniform_noise_band(n),
        fixed_index,
        used: stabilization.count,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_is_perfect_self_correlation() {
        let cfg = ExperimentConfig {
            n: 24,
            samples: 200,
            h: 0.01,
            t_end: 50.0,
            seed: 5,
            campaign: Campaign::CorrelationProbe {
                distances: vec![0, 1, 8],
                fixed_index: 0,
            },
        };
        let out = run_correlation_probe(&cfg).unwrap();
        assert_eq!(out.excluded, 0);
        for row in out.rows.iter().filter(|r| r.distance == 0) {
            assert!((row.r_fixed - 1.0).abs() < 1e-12);
            assert!((row.r_averaged - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neighbors_correlate_far_pairs_do_not() {
        let cfg = ExperimentConfig {
            n: 128,
            samples: 600,
            h: 0.01,
            t_end: 50.0,
            seed: 17,
            campaign: Campaign::CorrelationProbe {
                distances: vec![1, 40],
                fixed_index: 0,
            },
        };
        let out = run_correlation_probe(&cfg).unwrap();
        let entry_rows: Vec<_> = out
            .rows
            .iter()
            .filter(|r| r.event == EventKind::Entry)
            .collect();
        let near = entry_rows.iter().find(|r| r.distance == 1).unwrap();
        let far = entry_rows.iter().find(|r| r.distance == 40).unwrap();
        assert!(
            near.r_averaged.abs() > 3.0 * out.noise_band,
            "neighbor correlation {} inside noise band {}",
            near.r_averaged,
            out.noise_band
        );
        assert!(
            far.r_averaged.abs() < near.r_averaged.abs(),
            "far correlation should be weaker"
        );
    }
}
