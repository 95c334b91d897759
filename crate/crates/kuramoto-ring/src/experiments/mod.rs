//! Config-driven Monte Carlo campaigns.
//!
//! Every campaign is reproducible from an [`ExperimentConfig`]: the seed
//! fixes one RNG stream per trajectory, and aggregation order is fixed by
//! the sharding in [`driver`], so outputs are bit-identical across reruns
//! and across worker counts.

pub mod census;
pub mod correlation;
pub mod driver;
pub mod energy;
pub mod entry;
pub mod euler;
pub mod qdist;
pub mod sample;
pub mod timing;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::MIN_RING_SIZE;

pub use census::{run_basin_census, BasinCensus, ScalingFit};
pub use correlation::{run_correlation_probe, CorrelationResult, CorrelationRow, EventKind};
pub use driver::trajectory_rng;
pub use energy::{run_energy_decay, EnergyDecayResult};
pub use entry::{run_entry_times, EntryTimesResult};
pub use euler::{run_euler_comparison, EulerComparisonResult, EulerRow};
pub use qdist::{run_q_distribution, CheckpointStats, QDistributionResult};
pub use sample::sample_initial_condition;
pub use timing::{run_timing_scan, TimingRow, TimingScanResult};

/// Default integration step for campaigns.
pub const DEFAULT_STEP: f64 = 0.01;
/// Default integration horizon for campaigns.
pub const DEFAULT_HORIZON: f64 = 50.0;

fn default_h() -> f64 {
    DEFAULT_STEP
}

fn default_t_end() -> f64 {
    DEFAULT_HORIZON
}

fn default_true() -> bool {
    true
}

fn default_qdist_checkpoints() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 5.0, 10.0]
}

fn default_energy_checkpoints() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.2).collect()
}

fn default_euler_steps() -> Vec<f64> {
    vec![0.1, 0.05, 0.02, 0.01]
}

fn default_euler_reference_step() -> f64 {
    1e-4
}

fn default_euler_horizon_factor() -> f64 {
    2.0
}

fn default_census_fit_range() -> i64 {
    4
}

/// One Monte Carlo campaign: shared sampling parameters plus a
/// campaign-specific payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Ring size.
    pub n: usize,
    /// Number of sampled trajectories (per ring size, for scans).
    pub samples: usize,
    /// Integration step.
    #[serde(default = "default_h")]
    pub h: f64,
    /// Integration horizon; trajectories that have not entered the
    /// invariant region by then are excluded and counted.
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Master seed; trajectory `i` uses stream `i` of this seed.
    pub seed: u64,
    pub campaign: Campaign,
}

/// Campaign kind and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Campaign {
    /// Winding-number histogram at a list of checkpoint times, optionally
    /// plus the settled ("converged") distribution.
    QDistribution {
        #[serde(default = "default_qdist_checkpoints")]
        checkpoints: Vec<f64>,
        #[serde(default = "default_true")]
        include_converged: bool,
    },
    /// Mean stabilization and entry times across ring sizes.
    TimingScan { n_values: Vec<usize> },
    /// Pearson correlation between differences a given index distance
    /// apart, evaluated at each trajectory's stabilization and entry times.
    CorrelationProbe {
        distances: Vec<usize>,
        #[serde(default)]
        fixed_index: usize,
    },
    /// Pooled per-coordinate entry times with an exponential-tail fit.
    EntryTimes,
    /// Ensemble mean of energy per oscillator at checkpoint times, with an
    /// exponential-decay fit over the pre-convergence window.
    EnergyDecay {
        #[serde(default = "default_energy_checkpoints")]
        checkpoints: Vec<f64>,
    },
    /// Euler-on-differences global error against an RK4 reference, per
    /// step size, at horizon `horizon_log_factor · ln n`.
    EulerCompare {
        #[serde(default = "default_euler_steps")]
        step_sizes: Vec<f64>,
        #[serde(default = "default_euler_reference_step")]
        reference_step: f64,
        #[serde(default = "default_euler_horizon_factor")]
        horizon_log_factor: f64,
    },
    /// Final-winding census with Gaussian-vs-exponential scaling fits over
    /// `|q| ≤ fit_max_abs_q`.
    BasinCensus {
        #[serde(default = "default_census_fit_range")]
        fit_max_abs_q: i64,
    },
}

impl Campaign {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Campaign::QDistribution { .. } => "q_distribution",
            Campaign::TimingScan { .. } => "timing_scan",
            Campaign::CorrelationProbe { .. } => "correlation_probe",
            Campaign::EntryTimes => "entry_times",
            Campaign::EnergyDecay { .. } => "energy_decay",
            Campaign::EulerCompare { .. } => "euler_compare",
            Campaign::BasinCensus { .. } => "basin_census",
        }
    }
}

impl ExperimentConfig {
    /// Parse a TOML config; schema violations report the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        // A timing scan takes its ring sizes from the campaign list; the
        // shared n is unused there.
        if !matches!(self.campaign, Campaign::TimingScan { .. }) && self.n < MIN_RING_SIZE {
            return Err(Error::Config(format!(
                "n: a ring needs at least {MIN_RING_SIZE} oscillators, got {}",
                self.n
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples: must be at least 1".into()));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config(format!("h: must be positive, got {}", self.h)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!(
                "t_end: must be positive, got {}",
                self.t_end
            )));
        }
        match &self.campaign {
            Campaign::QDistribution { checkpoints, .. } => {
                for t in checkpoints {
                    if !t.is_finite() || *t < 0.0 || *t > self.t_end {
                        return Err(Error::Config(format!(
                            "campaign.checkpoints: {t} outside [0, t_end = {}]",
                            self.t_end
                        )));
                    }
                }
            }
            Campaign::TimingScan { n_values } => {
                if n_values.is_empty() {
                    return Err(Error::Config("campaign.n_values: must be non-empty".into()));
                }
                if let Some(bad) = n_values.iter().find(|n| **n < MIN_RING_SIZE) {
                    return Err(Error::Config(format!(
                        "campaign.n_values: ring size {bad} below minimum {MIN_RING_SIZE}"
                    )));
                }
            }
            Campaign::CorrelationProbe {
                distances,
                fixed_index,
            } => {
                if distances.is_empty() {
                    return Err(Error::Config("campaign.distances: must be non-empty".into()));
                }
                if let Some(bad) = distances.iter().find(|d| **d >= self.n) {
                    return Err(Error::Config(format!(
                        "campaign.distances: {bad} not below n = {}",
                        self.n
                    )));
                }
                if *fixed_index >= self.n {
                    return Err(Error::Config(format!(
                        "campaign.fixed_index: {fixed_index} not below n = {}",
                        self.n
                    )));
                }
            }
            Campaign::EntryTimes => {}
            Campaign::EnergyDecay { checkpoints } => {
                if checkpoints.is_empty() {
                    return Err(Error::Config(
                        "campaign.checkpoints: must be non-empty".into(),
                    ));
                }
                for t in checkpoints {
                    if !t.is_finite() || *t < 0.0 || *t > self.t_end {
                        return Err(Error::Config(format!(
                            "campaign.checkpoints: {t} outside [0, t_end = {}]",
                            self.t_end
                        )));
                    }
                }
            }
            Campaign::EulerCompare {
                step_sizes,
                reference_step,
                horizon_log_factor,
            } => {
                if step_sizes.is_empty() {
                    return Err(Error::Config("campaign.step_sizes: must be non-empty".into()));
                }
                if let Some(bad) = step_sizes.iter().find(|h| !h.is_finite() || **h <= 0.0) {
                    return Err(Error::Config(format!(
                        "campaign.step_sizes: {bad} must be positive"
                    )));
                }
                if !(reference_step.is_finite() && *reference_step > 0.0) {
                    return Err(Error::Config(format!(
                        "campaign.reference_step: {reference_step} must be positive"
                    )));
                }
                if !(horizon_log_factor.is_finite() && *horizon_log_factor > 0.0) {
                    return Err(Error::Config(format!(
                        "campaign.horizon_log_factor: {horizon_log_factor} must be positive"
                    )));
                }
            }
            Campaign::BasinCensus { fit_max_abs_q } => {
                if *fit_max_abs_q < 1 {
                    return Err(Error::Config(format!(
                        "campaign.fit_max_abs_q: must be at least 1, got {fit_max_abs_q}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Run the campaign and return its typed output.
    pub fn run(&self) -> Result<CampaignOutput> {
        self.validate()?;
        Ok(match &self.campaign {
            Campaign::QDistribution { .. } => {
                CampaignOutput::QDistribution(run_q_distribution(self)?)
            }
            Campaign::TimingScan { .. } => CampaignOutput::TimingScan(run_timing_scan(self)?),
            Campaign::CorrelationProbe { .. } => {
                CampaignOutput::Correlation(run_correlation_probe(self)?)
            }
            Campaign::EntryTimes => CampaignOutput::EntryTimes(run_entry_times(self)?),
            Campaign::EnergyDecay { .. } => CampaignOutput::EnergyDecay(run_energy_decay(self)?),
            Campaign::EulerCompare { .. } => {
                CampaignOutput::EulerCompare(run_euler_comparison(self)?)
            }
            Campaign::BasinCensus { .. } => CampaignOutput::BasinCensus(run_basin_census(self)?),
        })
    }
}

/// Typed result of any campaign.
#[derive(Debug, Clone)]
pub enum CampaignOutput {
    QDistribution(QDistributionResult),
    TimingScan(TimingScanResult),
    Correlation(CorrelationResult),
    EntryTimes(EntryTimesResult),
    EnergyDecay(EnergyDecayResult),
    EulerCompare(EulerComparisonResult),
    BasinCensus(BasinCensus),
}

/// Kind mismatch helper for the public per-campaign entry points.
fn expect_campaign<'c, T, F>(cfg: &'c ExperimentConfig, extract: F, wanted: &str) -> Result<T>
where
    F: FnOnce(&'c Campaign) -> Option<T>,
{
    extract(&cfg.campaign).ok_or_else(|| {
        Error::Config(format!(
            "campaign.kind: expected {wanted}, got {}",
            cfg.campaign.kind_name()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_with_defaults() {
        let text = r#"
            n = 80
            samples = 100
            seed = 42

            [campaign]
            kind = "basin_census"
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.h, DEFAULT_STEP);
        assert_eq!(cfg.t_end, DEFAULT_HORIZON);
        assert_eq!(
            cfg.campaign,
            Campaign::BasinCensus { fit_max_abs_q: 4 }
        );
        let echoed = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, echoed);
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        let text = r#"
            n = 80
            samples = 100
            seed = 42
            extra_knob = true

            [campaign]
            kind = "entry_times"
        "#;
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("extra_knob"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_field() {
        let text = r#"
            n = 80
            samples = 100
            seed = 1
            h = -0.5

            [campaign]
            kind = "entry_times"
        "#;
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("h:"), "{err}");

        let text = r#"
            n = 80
            samples = 100
            seed = 1

            [campaign]
            kind = "correlation_probe"
            distances = [1, 200]
        "#;
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("distances"), "{err}");
    }

    #[test]
    fn empty_config_is_a_schema_error() {
        assert!(matches!(
            ExperimentConfig::from_toml_str(""),
            Err(Error::Config(_))
        ));
    }
}
