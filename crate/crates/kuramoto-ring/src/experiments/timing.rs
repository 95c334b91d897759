//! Stabilization- and entry-time scan across ring sizes.

use crate::error::Result;
use crate::experiments::driver::{run_chunked, trajectory_rng};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::{expect_campaign, Campaign, ExperimentConfig};
use crate::monitors::TrajectoryWatcher;
use crate::stats::{fit_linear, FitResult};

/// Timing statistics for one ring size.
#[derive(Debug, Clone, Copy)]
pub struct TimingRow {
    pub n: usize,
    /// Trajectories that entered the invariant region by `t_end`.
    pub used: u64,
    pub excluded: u64,
    /// Trajectories with stabilization later than entry (expected 0; the
    /// entry freezes the winding number).
    pub order_violations: u64,
    pub mean_stabilization: f64,
    pub std_stabilization: f64,
    pub mean_entry: f64,
    pub std_entry: f64,
}

#[derive(Debug, Clone)]
pub struct TimingScanResult {
    pub rows: Vec<TimingRow>,
    /// Fit of mean stabilization time against `ln n`.
    pub stabilization_fit: Option<FitResult>,
    /// Fit of mean entry time against `ln n`.
    pub entry_fit: Option<FitResult>,
}

#[derive(Default, Clone, Copy)]
struct Accum {
    count: u64,
    excluded: u64,
    violations: u64,
    sum_ts: f64,
    sum_ts_sq: f64,
    sum_te: f64,
    sum_te_sq: f64,
}

impl Accum {
    fn merge(&mut self, other: &Accum) {
        self.count += other.count;
        self.excluded += other.excluded;
        self.violations += other.violations;
        self.sum_ts += other.sum_ts;
        self.sum_ts_sq += other.sum_ts_sq;
        self.sum_te += other.sum_te;
        self.sum_te_sq += other.sum_te_sq;
    }
}

pub fn run_timing_scan(cfg: &ExperimentConfig) -> Result<TimingScanResult> {
    let n_values = expect_campaign(
        cfg,
        |c| match c {
            Campaign::TimingScan { n_values } => Some(n_values.clone()),
            _ => None,
        },
        "timing_scan",
    )?;

    let mut rows = Vec::with_capacity(n_values.len());
    for (n_index, &n) in n_values.iter().enumerate() {
        let stream_base = (n_index * cfg.samples) as u64;
        let partials = run_chunked(cfg.samples, |range| {
            let mut acc = Accum::default();
            for index in range {
                let mut rng = trajectory_rng(cfg.seed, stream_base + index as u64);
                let initial = sample_initial_condition(n, &mut rng);
                let mut watcher = TrajectoryWatcher::new(&initial, cfg.h);
                watcher.run(cfg.t_end, true, 0);
                match watcher.entry_time() {
                    Some(te) => {
                        let ts = watcher.stabilization_time();
                        if ts > te {
                            acc.violations += 1;
                        }
                        acc.count += 1;
                        acc.sum_ts += ts;
                        acc.sum_ts_sq += ts * ts;
                        acc.sum_te += te;
                        acc.sum_te_sq += te * te;
                    }
                    None => acc.excluded += 1,
                }
            }
            acc
        });
        let mut total = Accum::default();
        for p in &partials {
            total.merge(p);
        }
        rows.push(row_from_accum(n, &total));
    }

    let ln_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let mean_ts: Vec<f64> = rows.iter().map(|r| r.mean_stabilization).collect();
    let mean_te: Vec<f64> = rows.iter().map(|r| r.mean_entry).collect();
    let stabilization_fit = fit_linear(&ln_n, &mean_ts, None).ok();
    let entry_fit = fit_linear(&ln_n, &mean_te, None).ok();

    Ok(TimingScanResult {
        rows,
        stabilization_fit,
        entry_fit,
    })
}

fn row_from_accum(n: usize, acc: &Accum) -> TimingRow {
    let c = acc.count as f64;
    let (mean_ts, std_ts, mean_te, std_te) = if acc.count >= 2 {
        let m_ts = acc.sum_ts / c;
        let m_te = acc.sum_te / c;
        let v_ts = ((acc.sum_ts_sq - c * m_ts * m_ts) / (c - 1.0)).max(0.0);
        let v_te = ((acc.sum_te_sq - c * m_te * m_te) / (c - 1.0)).max(0.0);
        (m_ts, v_ts.sqrt(), m_te, v_te.sqrt())
    } else {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    };
    TimingRow {
        n,
        used: acc.count,
        excluded: acc.excluded,
        order_violations: acc.violations,
        mean_stabilization: mean_ts,
        std_stabilization: std_ts,
        mean_entry: mean_te,
        std_entry: std_te,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_produces_ordered_rows_and_no_violations() {
        let cfg = ExperimentConfig {
            n: 0, // unused: per-row sizes come from the campaign list
            samples: 150,
            h: 0.01,
            t_end: 50.0,
            seed: 31,
            campaign: Campaign::TimingScan {
                n_values: vec![20, 40, 80],
            },
        };
        let out = run_timing_scan(&cfg).unwrap();
        assert_eq!(out.rows.len(), 3);
        for row in &out.rows {
            assert_eq!(row.excluded, 0, "n = {}", row.n);
            assert_eq!(row.order_violations, 0, "n = {}", row.n);
            assert!(row.mean_stabilization <= row.mean_entry);
        }
        // entry times grow with n
        assert!(out.rows[0].mean_entry < out.rows[2].mean_entry);
        assert!(out.entry_fit.unwrap().slope > 0.0);
    }

    #[test]
    fn split_halves_agree() {
        // Two disjoint batches of the same size give means within a few
        // percent of each other.
        let base = ExperimentConfig {
            n: 40,
            samples: 400,
            h: 0.01,
            t_end: 50.0,
            seed: 7,
            campaign: Campaign::TimingScan {
                n_values: vec![40],
            },
        };
        let mut other = base.clone();
        other.seed = 8;
        let a = run_timing_scan(&base).unwrap().rows[0];
        let b = run_timing_scan(&other).unwrap().rows[0];
        let rel = (a.mean_entry - b.mean_entry).abs() / a.mean_entry;
        assert!(rel < 0.1, "split-half relative gap {rel}");
    }
}
