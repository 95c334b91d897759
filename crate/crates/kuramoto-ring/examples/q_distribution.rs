//! Winding-number distribution at several times: Gaussian-shaped at t = 0
//! with variance (n−1)/12, still Gaussian-shaped but narrower once settled.
//!
//! ```bash
//! cargo run --release --example q_distribution
//! ```

use kuramoto_ring::experiments::{Campaign, ExperimentConfig};
use kuramoto_ring::CampaignOutput;

fn main() {
    let cfg = ExperimentConfig {
        n: 160,
        samples: 3000,
        h: 0.01,
        t_end: 50.0,
        seed: 42,
        campaign: Campaign::QDistribution {
            checkpoints: vec![0.0, 1.0, 5.0],
            include_converged: true,
        },
    };
    let CampaignOutput::QDistribution(out) = cfg.run().unwrap() else {
        unreachable!()
    };

    println!(
        "n = {}, {} samples   (uniform prediction at t=0: variance = (n−1)/12 = {:.3})\n",
        cfg.n,
        cfg.samples,
        (cfg.n as f64 - 1.0) / 12.0
    );
    println!("{:<12} {:>8} {:>10} {:>10} {:>12}", "checkpoint", "samples", "variance", "skewness", "ex. kurtosis");
    for cp in &out.checkpoints {
        let label = cp
            .time
            .map_or_else(|| "settled".to_string(), |t| format!("t = {t}"));
        println!(
            "{label:<12} {:>8} {:>10.3} {:>+10.3} {:>+12.3}",
            cp.samples, cp.variance, cp.skewness, cp.excess_kurtosis
        );
    }

    let settled = out.checkpoints.last().unwrap();
    println!("\nsettled histogram:");
    let max = *settled.histogram.values().max().unwrap();
    for (q, c) in &settled.histogram {
        let bar = "#".repeat((60 * c / max) as usize);
        println!("  q = {q:>3}: {c:>6} {bar}");
    }
    println!(
        "\nnot converged by t_end: {}   ill-defined samples retried one step later: {}",
        out.not_converged, out.resampled
    );
}
