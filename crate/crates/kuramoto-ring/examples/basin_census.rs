//! Basin-size census: sample random initial phases, read each trajectory's
//! frozen winding number at invariant-region entry, and compare the two
//! candidate scaling laws for basin size against winding number — Gaussian
//! (ln p linear in q²) versus exponential (ln p linear in |q|).
//!
//! ```bash
//! cargo run --release --example basin_census
//! ```

use kuramoto_ring::experiments::{Campaign, ExperimentConfig};
use kuramoto_ring::CampaignOutput;

fn main() {
    let cfg = ExperimentConfig {
        n: 40,
        samples: 30_000,
        h: 0.01,
        t_end: 50.0,
        seed: 1,
        campaign: Campaign::BasinCensus { fit_max_abs_q: 4 },
    };
    println!(
        "n = {}, {} samples (stable twists: |q| < {})",
        cfg.n,
        cfg.samples,
        cfg.n as f64 / 4.0
    );
    let CampaignOutput::BasinCensus(census) = cfg.run().unwrap() else {
        unreachable!()
    };

    println!(
        "classified: {}   not converged: {}\n",
        census.converged(),
        census.not_converged
    );
    let max = *census.counts.values().max().unwrap();
    for (q, c) in &census.counts {
        let bar = "#".repeat((58 * c / max) as usize);
        println!("  q = {q:>3}: p = {:.5}  {bar}", census.probability(*q));
    }

    let gauss = census.gaussian_fit.unwrap();
    let exp = census.exponential_fit.unwrap();
    println!("\nweighted fits of ln p(q) over |q| ≤ {}:", census.fit_max_abs_q);
    println!(
        "  ln p = {:+.3} − {:.3}·q²    residual SS = {:>9.3}, AIC = {:>8.1}",
        gauss.log_prefactor, gauss.decay, gauss.residual_ss, gauss.aic
    );
    println!(
        "  ln p = {:+.3} − {:.3}·|q|    residual SS = {:>9.3}, AIC = {:>8.1}",
        exp.log_prefactor, exp.decay, exp.residual_ss, exp.aic
    );
    let winner = if gauss.residual_ss < exp.residual_ss {
        "q² (Gaussian)"
    } else {
        "|q| (exponential)"
    };
    println!("\nbetter model on residuals: {winner}");
}
