//! Pooled per-coordinate entry times into the invariant region.
//!
//! Under uniform random initial phases half of the coordinates start
//! inside `(−π/2, π/2)`, producing a point mass at zero; the nonzero entry
//! times are pooled over all coordinates and trajectories and fitted with
//! an exponential rate plus a log-survival linearity diagnostic.

use crate::error::Result;
use crate::experiments::driver::{run_chunked, trajectory_rng};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::{expect_campaign, Campaign, ExperimentConfig};
use crate::monitors::TrajectoryWatcher;
use crate::stats::{fit_exponential_tail, histogram, FitResult, Histogram};

#[derive(Debug, Clone)]
pub struct EntryTimesResult {
    /// Coordinates observed: samples × n.
    pub total_coordinates: u64,
    /// Coordinates already inside the region at t = 0.
    pub zero_count: u64,
    pub zero_fraction: f64,
    /// Coordinates that never entered by `t_end` (censored; excluded from
    /// the fit).
    pub censored: u64,
    pub nonzero_count: u64,
    pub mean_nonzero: f64,
    /// Maximum-likelihood exponential rate of the nonzero entry times.
    pub rate: Option<f64>,
    /// Fit of log-survival against time up to the 99th percentile.
    pub survival_fit: Option<FitResult>,
    /// Equal-width histogram of the nonzero entry times.
    pub nonzero_histogram: Option<Histogram>,
}

pub fn run_entry_times(cfg: &ExperimentConfig) -> Result<EntryTimesResult> {
    expect_campaign(
        cfg,
        |c| match c {
            Campaign::EntryTimes => Some(()),
            _ => None,
        },
        "entry_times",
    )?;

    struct Partial {
        zeros: u64,
        censored: u64,
        nonzero: Vec<f64>,
    }

    let partials = run_chunked(cfg.samples, |range| {
        let mut part = Partial {
            zeros: 0,
            censored: 0,
            nonzero: Vec::new(),
        };
        for index in range {
            let mut rng = trajectory_rng(cfg.seed, index as u64);
            let initial = sample_initial_condition(cfg.n, &mut rng);
            let mut watcher = TrajectoryWatcher::new(&initial, cfg.h);
            watcher.run(cfg.t_end, true, 0);
            let events = watcher.finish();
            for t in &events.entry_times {
                match t {
                    Some(t) if *t == 0.0 => part.zeros += 1,
                    Some(t) => part.nonzero.push(*t),
                    None => part.censored += 1,
                }
            }
        }
        part
    });

    let mut zeros = 0;
    let mut censored = 0;
    let mut nonzero = Vec::new();
    for part in partials {
        zeros += part.zeros;
        censored += part.censored;
        nonzero.extend(part.nonzero);
    }

    let total = (cfg.samples * cfg.n) as u64;
    let mean_nonzero = if nonzero.is_empty() {
        f64::NAN
    } else {
        nonzero.iter().sum::<f64>() / nonzero.len() as f64
    };
    let (rate, survival_fit) = match fit_exponential_tail(&nonzero) {
        Ok(fit) => (Some(fit.lambda), fit.survival_fit),
        Err(_) => (None, None),
    };
    let nonzero_histogram = histogram(&nonzero, 120, None).ok();

    Ok(EntryTimesResult {
        total_coordinates: total,
        zero_count: zeros,
        zero_fraction: zeros as f64 / total as f64,
        censored,
        nonzero_count: nonzero.len() as u64,
        mean_nonzero,
        rate,
        survival_fit,
        nonzero_histogram,
    })
}
