//! File outputs: per-campaign CSV bodies, the JSON run manifest, and
//! staged (all-or-nothing) writing.
//!
//! CSV bodies contain nothing non-deterministic, so a rerun with the same
//! config and seed is byte-identical regardless of worker count. Wall
//! times and timestamps live only in the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::experiments::{CampaignOutput, ExperimentConfig};

/// Run metadata written next to every campaign's CSV outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    /// Full effective configuration (defaults resolved).
    pub config: ExperimentConfig,
    pub seed: u64,
    pub integrator: &'static str,
    pub started: String,
    pub finished: String,
    pub wall_seconds: f64,
    /// Data files produced by this run; all exist on successful exit.
    pub outputs: Vec<String>,
    pub exclusions: BTreeMap<String, u64>,
    /// Campaign-specific summary values (fits, fractions, bands).
    pub metadata: Value,
}

pub fn tool_version() -> String {
    format!("kuramoto-ring {}", env!("CARGO_PKG_VERSION"))
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// CSV files (name, bytes) for a campaign output.
pub fn campaign_csvs(kind: &str, output: &CampaignOutput) -> Vec<(String, Vec<u8>)> {
    match output {
        CampaignOutput::QDistribution(out) => {
            let mut hist_rows = Vec::new();
            let mut stat_rows = Vec::new();
            for cp in &out.checkpoints {
                let label = cp
                    .time
                    .map_or_else(|| "converged".to_string(), |t| format!("{t}"));
                for (q, c) in &cp.histogram {
                    hist_rows.push(vec![label.clone(), q.to_string(), c.to_string()]);
                }
                stat_rows.push(vec![
                    label,
                    cp.samples.to_string(),
                    fmt_f64(cp.mean),
                    fmt_f64(cp.variance),
                    fmt_f64(cp.skewness),
                    fmt_f64(cp.excess_kurtosis),
                ]);
            }
            vec![
                (
                    format!("{kind}.csv"),
                    csv_bytes(&["checkpoint", "q", "count"], hist_rows),
                ),
                (
                    format!("{kind}_stats.csv"),
                    csv_bytes(
                        &[
                            "checkpoint",
                            "samples",
                            "mean",
                            "variance",
                            "skewness",
                            "excess_kurtosis",
                        ],
                        stat_rows,
                    ),
                ),
            ]
        }
        CampaignOutput::TimingScan(out) => {
            let rows = out
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.used.to_string(),
                        r.excluded.to_string(),
                        r.order_violations.to_string(),
                        fmt_f64(r.mean_stabilization),
                        fmt_f64(r.std_stabilization),
                        fmt_f64(r.mean_entry),
                        fmt_f64(r.std_entry),
                    ]
                })
                .collect();
            vec![(
                format!("{kind}.csv"),
                csv_bytes(
                    &[
                        "n",
                        "used",
                        "excluded",
                        "order_violations",
                        "mean_stabilization",
                        "std_stabilization",
                        "mean_entry",
                        "std_entry",
                    ],
                    rows,
                ),
            )]
        }
        CampaignOutput::Correlation(out) => {
            let rows = out
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.event.label().to_string(),
                        r.distance.to_string(),
                        fmt_f64(r.r_fixed),
                        fmt_f64(r.r_averaged),
                        fmt_f64(out.noise_band),
                    ]
                })
                .collect();
            vec![(
                format!("{kind}.csv"),
                csv_bytes(
                    &["event", "distance", "r_fixed", "r_averaged", "noise_band"],
                    rows,
                ),
            )]
        }
        CampaignOutput::EntryTimes(out) => {
            let rows = match &out.nonzero_histogram {
                Some(h) => h
                    .counts
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        vec![
                            fmt_f64(h.edges[i]),
                            fmt_f64(h.edges[i + 1]),
                            c.to_string(),
                        ]
                    })
                    .collect(),
                None => Vec::new(),
            };
            vec![(
                format!("{kind}.csv"),
                csv_bytes(&["bin_lo", "bin_hi", "count"], rows),
            )]
        }
        CampaignOutput::EnergyDecay(out) => {
            let rows = out
                .trace
                .iter()
                .map(|(t, e)| vec![fmt_f64(*t), fmt_f64(*e)])
                .collect();
            vec![(
                format!("{kind}.csv"),
                csv_bytes(&["t", "mean_energy_per_oscillator"], rows),
            )]
        }
        CampaignOutput::EulerCompare(out) => {
            let rows = out
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.step_size),
                        fmt_f64(r.mean_max_deviation),
                        fmt_f64(r.max_max_deviation),
                        fmt_f64(r.winding_mismatch_fraction),
                    ]
                })
                .collect();
            vec![(
                format!("{kind}.csv"),
                csv_bytes(
                    &[
                        "step_size",
                        "mean_max_deviation",
                        "max_max_deviation",
                        "winding_mismatch_fraction",
                    ],
                    rows,
                ),
            )]
        }
        CampaignOutput::BasinCensus(out) => {
            let rows = out
                .counts
                .iter()
                .map(|(q, c)| {
                    vec![
                        q.to_string(),
                        c.to_string(),
                        fmt_f64(out.probability(*q)),
                    ]
                })
                .collect();
            vec![(
                format!("{kind}.csv"),
                csv_bytes(&["q", "count", "probability"], rows),
            )]
        }
    }
}

/// Exclusion counters for the manifest.
pub fn campaign_exclusions(output: &CampaignOutput) -> BTreeMap<String, u64> {
    let mut map = BTreeMap::new();
    match output {
        CampaignOutput::QDistribution(out) => {
            map.insert("not_converged".into(), out.not_converged);
            map.insert("resampled_one_step_later".into(), out.resampled);
            map.insert("dropped_checkpoint_samples".into(), out.dropped);
        }
        CampaignOutput::TimingScan(out) => {
            map.insert(
                "not_converged".into(),
                out.rows.iter().map(|r| r.excluded).sum(),
            );
        }
        CampaignOutput::Correlation(out) => {
            map.insert("not_converged".into(), out.excluded);
        }
        CampaignOutput::EntryTimes(out) => {
            map.insert("censored_coordinates".into(), out.censored);
        }
        CampaignOutput::EnergyDecay(_) => {}
        CampaignOutput::EulerCompare(out) => {
            map.insert("reference_ill_defined".into(), out.reference_ill_defined);
        }
        CampaignOutput::BasinCensus(out) => {
            map.insert("not_converged".into(), out.not_converged);
        }
    }
    map
}

fn fit_json(fit: &Option<crate::stats::FitResult>) -> Value {
    match fit {
        Some(f) => json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "r_squared": f.r_squared,
            "residual_ss": f.residual_ss,
            "n_points": f.n_points,
        }),
        None => Value::Null,
    }
}

/// Campaign-specific summary block for the manifest.
pub fn campaign_metadata(output: &CampaignOutput) -> Value {
    match output {
        CampaignOutput::QDistribution(out) => json!({
            "total_trajectories": out.total,
            "checkpoints": out.checkpoints.iter().map(|cp| json!({
                "time": cp.time,
                "samples": cp.samples,
                "mean": cp.mean,
                "variance": cp.variance,
                "skewness": cp.skewness,
                "excess_kurtosis": cp.excess_kurtosis,
            })).collect::<Vec<_>>(),
        }),
        CampaignOutput::TimingScan(out) => json!({
            "stabilization_vs_ln_n": fit_json(&out.stabilization_fit),
            "entry_vs_ln_n": fit_json(&out.entry_fit),
        }),
        CampaignOutput::Correlation(out) => json!({
            "noise_band": out.noise_band,
            "fixed_index": out.fixed_index,
            "index_conventions": ["fixed_index", "averaged_over_indices"],
            "trajectories_used": out.used,
        }),
        CampaignOutput::EntryTimes(out) => json!({
            "total_coordinates": out.total_coordinates,
            "zero_fraction": out.zero_fraction,
            "nonzero_count": out.nonzero_count,
            "mean_nonzero": out.mean_nonzero,
            "exponential_rate_mle": out.rate,
            "log_survival_fit": fit_json(&out.survival_fit),
        }),
        CampaignOutput::EnergyDecay(out) => json!({
            "initial_mean_energy_per_oscillator": out.initial_mean,
            "decay_rate": out.decay_rate,
            "decay_fit": fit_json(&out.decay_fit),
            "monotonicity_violations": out.monotonicity_violations,
        }),
        CampaignOutput::EulerCompare(out) => json!({
            "horizon": out.horizon,
            "reference_step": out.reference_step,
            "samples_used": out.samples_used,
        }),
        CampaignOutput::BasinCensus(out) => json!({
            "total": out.total,
            "converged": out.converged(),
            "valid": out.is_valid(),
            "fit_max_abs_q": out.fit_max_abs_q,
            "gaussian_fit": out.gaussian_fit.as_ref().map(|f| json!({
                "decay": f.decay, "log_prefactor": f.log_prefactor,
                "r_squared": f.r_squared, "residual_ss": f.residual_ss,
                "aic": f.aic, "n_points": f.n_points,
            })),
            "exponential_fit": out.exponential_fit.as_ref().map(|f| json!({
                "decay": f.decay, "log_prefactor": f.log_prefactor,
                "r_squared": f.r_squared, "residual_ss": f.residual_ss,
                "aic": f.aic, "n_points": f.n_points,
            })),
        }),
    }
}

/// Staged output set: nothing touches the output directory until
/// [`OutputSet::commit`], and a failed commit removes what it had written.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn stage(&mut self, name: String, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }

    pub fn staged_names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Write every staged file; on failure remove whatever was written.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(e.into());
            }
            written.push(path);
        }
        Ok(written)
    }
}
