//! Command-line front end: one subcommand per campaign plus a single
//! trajectory simulator, all writing reproducible file outputs.
//!
//! Exit codes: 0 success, 1 runtime/I-O failure, 2 usage or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{Campaign, CampaignOutput, ExperimentConfig};
use crate::integrate::integrate;
use crate::report::{
    campaign_csvs, campaign_exclusions, campaign_metadata, tool_version, OutputSet, RunManifest,
};
use crate::ring::{twisted_state, RingState, TwistSpec};
use crate::experiments::sample::sample_initial_condition;
use crate::experiments::trajectory_rng;

#[derive(Parser)]
#[command(
    name = "kuramoto-ring",
    version,
    about = "Identical Kuramoto oscillators on a ring: winding numbers, invariant-region timing, and basin-size censuses"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write its time series
    Simulate(SimulateArgs),
    /// Winding-number histograms at checkpoint times (plus settled)
    Qdist(QdistArgs),
    /// Mean stabilization/entry times across ring sizes
    Timing(TimingArgs),
    /// Correlation between differences at a range of index distances
    Corr(CorrArgs),
    /// Pooled per-coordinate entry times with an exponential fit
    Entry(EntryArgs),
    /// Ensemble energy decay with an exponential-rate fit
    Energy(EnergyArgs),
    /// Euler-vs-RK4 discretization error per step size
    Euler(EulerArgs),
    /// Final-winding census with Gaussian/exponential scaling fits
    Census(CensusArgs),
}

/// Flags shared by every campaign subcommand. Explicit flags override the
/// config file, which overrides built-in defaults.
#[derive(Args)]
struct CommonArgs {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ring size
    #[arg(long)]
    n: Option<usize>,
    /// Trajectories to sample
    #[arg(long)]
    samples: Option<usize>,
    /// Integration step
    #[arg(long)]
    h: Option<f64>,
    /// Integration horizon
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Master seed (trajectory i uses stream i)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores); outputs do not depend on it
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct QdistArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Checkpoint times, comma separated
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
    /// Skip the settled ("converged") histogram
    #[arg(long)]
    no_converged: bool,
}

#[derive(Args)]
struct TimingArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ring sizes, comma separated
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
}

#[derive(Args)]
struct CorrArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Index distances, comma separated
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<usize>>,
    /// Reference index for the fixed-index correlation column
    #[arg(long = "fixed-index")]
    fixed_index: Option<usize>,
}

#[derive(Args)]
struct EntryArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EnergyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Checkpoint times, comma separated
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
}

#[derive(Args)]
struct EulerArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Euler step sizes, comma separated
    #[arg(long = "h-list", value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// RK4 reference step
    #[arg(long = "h-ref")]
    h_ref: Option<f64>,
    /// Horizon factor C in t = C·ln n
    #[arg(long = "t-factor")]
    t_factor: Option<f64>,
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest |q| used in the scaling fits
    #[arg(long = "fit-max-q")]
    fit_max_q: Option<i64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Ring size
    #[arg(long, default_value_t = 80)]
    n: usize,
    /// Start from the q-twisted state instead of a random state
    #[arg(long)]
    twist: Option<i64>,
    /// Start from uniform random phases (the default)
    #[arg(long, conflicts_with = "twist")]
    random: bool,
    /// Integration step
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Integration horizon
    #[arg(long = "t-end", default_value_t = 50.0)]
    t_end: f64,
    /// Seed for the random start
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time between output rows
    #[arg(long = "sample-dt", default_value_t = 0.1)]
    sample_dt: f64,
    /// Output CSV path
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(&args),
        Command::Qdist(args) => {
            let mut cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 1280,
                    samples: 100_000,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::QDistribution {
                        checkpoints: vec![0.0, 1.0, 2.0, 5.0, 10.0],
                        include_converged: true,
                    },
                },
                "q_distribution",
            )?;
            if let Campaign::QDistribution {
                checkpoints,
                include_converged,
            } = &mut cfg.campaign
            {
                if let Some(cps) = args.checkpoints {
                    *checkpoints = cps;
                }
                if args.no_converged {
                    *include_converged = false;
                }
            }
            run_campaign(cfg, &args.common, "qdist")
        }
        Command::Timing(args) => {
            let mut cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 1280,
                    samples: 10_000,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::TimingScan {
                        n_values: vec![40, 80, 160, 320, 640, 1280],
                    },
                },
                "timing_scan",
            )?;
            if let Campaign::TimingScan { n_values } = &mut cfg.campaign {
                if let Some(list) = args.n_list {
                    *n_values = list;
                }
            }
            run_campaign(cfg, &args.common, "timing")
        }
        Command::Corr(args) => {
            let mut cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 1280,
                    samples: 100_000,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::CorrelationProbe {
                        distances: vec![1, 2, 3, 4, 5, 6, 8, 10, 20, 50, 100, 200, 500],
                        fixed_index: 0,
                    },
                },
                "correlation_probe",
            )?;
            if let Campaign::CorrelationProbe {
                distances,
                fixed_index,
            } = &mut cfg.campaign
            {
                if let Some(list) = args.distances {
                    *distances = list;
                }
                if let Some(idx) = args.fixed_index {
                    *fixed_index = idx;
                }
            }
            run_campaign(cfg, &args.common, "corr")
        }
        Command::Entry(args) => {
            let cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 1280,
                    samples: 10_000,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::EntryTimes,
                },
                "entry_times",
            )?;
            run_campaign(cfg, &args.common, "entry")
        }
        Command::Energy(args) => {
            let mut cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 1280,
                    samples: 1000,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::EnergyDecay {
                        checkpoints: (0..=100).map(|i| i as f64 * 0.2).collect(),
                    },
                },
                "energy_decay",
            )?;
            if let Campaign::EnergyDecay { checkpoints } = &mut cfg.campaign {
                if let Some(cps) = args.checkpoints {
                    *checkpoints = cps;
                }
            }
            run_campaign(cfg, &args.common, "energy")
        }
        Command::Euler(args) => {
            let mut cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 80,
                    samples: 100,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::EulerCompare {
                        step_sizes: vec![0.1, 0.05, 0.02, 0.01],
                        reference_step: 1e-4,
                        horizon_log_factor: 2.0,
                    },
                },
                "euler_compare",
            )?;
            if let Campaign::EulerCompare {
                step_sizes,
                reference_step,
                horizon_log_factor,
            } = &mut cfg.campaign
            {
                if let Some(list) = args.h_list {
                    *step_sizes = list;
                }
                if let Some(h_ref) = args.h_ref {
                    *reference_step = h_ref;
                }
                if let Some(f) = args.t_factor {
                    *horizon_log_factor = f;
                }
            }
            run_campaign(cfg, &args.common, "euler")
        }
        Command::Census(args) => {
            let mut cfg = base_config(
                &args.common,
                ExperimentConfig {
                    n: 80,
                    samples: 1_000_000,
                    h: 0.01,
                    t_end: 50.0,
                    seed: 0,
                    campaign: Campaign::BasinCensus { fit_max_abs_q: 4 },
                },
                "basin_census",
            )?;
            if let Campaign::BasinCensus { fit_max_abs_q } = &mut cfg.campaign {
                if let Some(q) = args.fit_max_q {
                    *fit_max_abs_q = q;
                }
            }
            run_campaign(cfg, &args.common, "census")
        }
    }
}

/// Load the config file (or defaults) and apply shared flag overrides.
fn base_config(
    common: &CommonArgs,
    defaults: ExperimentConfig,
    expected_kind: &str,
) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_toml_path(path)?,
        None => defaults,
    };
    if cfg.campaign.kind_name() != expected_kind {
        return Err(Error::Config(format!(
            "campaign.kind: this subcommand runs {expected_kind}, config file says {}",
            cfg.campaign.kind_name()
        )));
    }
    if let Some(n) = common.n {
        cfg.n = n;
    }
    if let Some(samples) = common.samples {
        cfg.samples = samples;
    }
    if let Some(h) = common.h {
        cfg.h = h;
    }
    if let Some(t_end) = common.t_end {
        cfg.t_end = t_end;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_campaign(cfg: ExperimentConfig, common: &CommonArgs, kind: &str) -> Result<()> {
    cfg.validate()?;
    let started = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let clock = Instant::now();
    let output = run_with_workers(&cfg, common.workers)?;
    let wall_seconds = clock.elapsed().as_secs_f64();
    let finished = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);

    let written = write_outputs(
        &common.out_dir,
        kind,
        &cfg,
        &output,
        started,
        finished,
        wall_seconds,
    )?;
    println!("{kind}: {} samples in {wall_seconds:.1}s", cfg.samples);
    for path in written {
        println!("  wrote {}", path.display());
    }
    Ok(())
}

fn run_with_workers(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<CampaignOutput> {
    match workers {
        None => cfg.run(),
        Some(0) => Err(Error::InvalidArgument("--workers must be at least 1".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidState(format!("worker pool: {e}")))?;
            pool.install(|| cfg.run())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn write_outputs(
    out_dir: &Path,
    kind: &str,
    cfg: &ExperimentConfig,
    output: &CampaignOutput,
    started: String,
    finished: String,
    wall_seconds: f64,
) -> Result<Vec<PathBuf>> {
    let mut set = OutputSet::new(out_dir);
    for (name, bytes) in campaign_csvs(kind, output) {
        set.stage(name, bytes);
    }
    let manifest = RunManifest {
        tool: tool_version(),
        command: kind.to_string(),
        config: cfg.clone(),
        seed: cfg.seed,
        integrator: "rk4",
        started,
        finished,
        wall_seconds,
        outputs: set.staged_names(),
        exclusions: campaign_exclusions(output),
        metadata: campaign_metadata(output),
    };
    let manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| Error::InvalidState(format!("manifest serialization: {e}")))?;
    set.stage(format!("{kind}_manifest.json"), manifest_bytes);
    set.commit()
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    if !(args.h.is_finite() && args.h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--h must be positive, got {}",
            args.h
        )));
    }
    if !(args.t_end.is_finite() && args.t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--t-end must be positive, got {}",
            args.t_end
        )));
    }
    if !(args.sample_dt.is_finite() && args.sample_dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--sample-dt must be positive, got {}",
            args.sample_dt
        )));
    }
    let initial = match args.twist {
        Some(q) => twisted_state(&TwistSpec::new(args.n, q, 0.0)?),
        None => {
            let mut rng = trajectory_rng(args.seed, 0);
            sample_initial_condition(args.n, &mut rng)
        }
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "q", "energy_per_oscillator", "max_abs_diff", "in_region"])
        .expect("in-memory csv");
    let mut write_row = |t: f64, state: &RingState| {
        let diffs = state.to_diffs();
        let q = diffs
            .winding_number()
            .map_or(String::new(), |q| q.to_string());
        let energy = crate::dynamics::energy(&diffs) / args.n as f64;
        w.write_record([
            format!("{t}"),
            q,
            format!("{energy}"),
            format!("{}", diffs.max_abs()),
            format!("{}", diffs.in_invariant_region()),
        ])
        .expect("in-memory csv");
    };

    write_row(0.0, &initial);
    let mut next_sample = args.sample_dt;
    integrate(&initial, args.h, args.t_end, |t, state| -> Result<()> {
        if t + 1e-9 >= next_sample {
            write_row(t, state);
            while next_sample <= t + 1e-9 {
                next_sample += args.sample_dt;
            }
        }
        Ok(())
    })?;

    let bytes = w.into_inner().expect("in-memory csv");
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&args.out, bytes)?;
    println!("simulate: wrote {}", args.out.display());
    Ok(())
}
