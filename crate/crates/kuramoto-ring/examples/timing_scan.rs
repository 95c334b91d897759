//! Mean winding-stabilization and invariant-region entry times across ring
//! sizes: both grow like log n, and t_s ≤ t_e on every single trajectory.
//!
//! ```bash
//! cargo run --release --example timing_scan
//! ```

use kuramoto_ring::experiments::{Campaign, ExperimentConfig};
use kuramoto_ring::CampaignOutput;

fn main() {
    let cfg = ExperimentConfig {
        n: 0, // unused: sizes come from the scan list
        samples: 300,
        h: 0.01,
        t_end: 50.0,
        seed: 11,
        campaign: Campaign::TimingScan {
            n_values: vec![20, 40, 80, 160, 320],
        },
    };
    let CampaignOutput::TimingScan(out) = cfg.run().unwrap() else {
        unreachable!()
    };

    println!("{} samples per ring size\n", cfg.samples);
    println!(
        "{:>6} {:>12} {:>12} {:>10} {:>10}",
        "n", "<t_s>", "<t_e>", "σ(t_s)", "σ(t_e)"
    );
    for row in &out.rows {
        println!(
            "{:>6} {:>12.3} {:>12.3} {:>10.3} {:>10.3}",
            row.n, row.mean_stabilization, row.mean_entry, row.std_stabilization, row.std_entry
        );
        assert_eq!(row.order_violations, 0, "t_s ≤ t_e must hold per trajectory");
    }

    let ts = out.stabilization_fit.unwrap();
    let te = out.entry_fit.unwrap();
    println!("\nfits against ln n:");
    println!(
        "  <t_s> ≈ {:.3}·ln n {:+.3}   (R² = {:.4})",
        ts.slope, ts.intercept, ts.r_squared
    );
    println!(
        "  <t_e> ≈ {:.3}·ln n {:+.3}   (R² = {:.4})",
        te.slope, te.intercept, te.r_squared
    );
}
