//! Does the auxiliary data help? For each seed, train the full model and a
//! baseline that sees only the target domain with every penalty switched
//! off, then compare target test accuracy on the same split. The data is the
//! eight-class transfer benchmark.
//!
//! Run with `cargo run --release --example transfer_vs_baseline -- [seeds]`.

use dtcae::experiment::{mean_gain, transfer_comparison};
use dtcae::{Result, SynthSpec, TrainConfig};

fn main() -> Result<()> {
    let seeds = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10u64);
    let spec = SynthSpec::transfer_benchmark();
    let runs = transfer_comparison(&spec, &TrainConfig::default(), 0..seeds)?;

    println!("{:>4} {:>8} {:>9} {:>7}", "seed", "full", "baseline", "gain");
    for r in &runs {
        println!("{:>4} {:>8.3} {:>9.3} {:>+7.3}", r.seed, r.full, r.baseline, r.gain());
    }
    let mean = |f: fn(&dtcae::experiment::TransferRun) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    println!(
        "mean {:>8.3} {:>9.3} {:>+7.3}",
        mean(|r| r.full),
        mean(|r| r.baseline),
        mean_gain(&runs)
    );
    Ok(())
}
