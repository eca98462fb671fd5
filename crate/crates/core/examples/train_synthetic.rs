//! Train on the standard synthetic dataset and print the objective curve:
//! every term at a few checkpoints, how often a step failed to decrease the
//! total, and the target test accuracy.
//!
//! Run with `cargo run --release --example train_synthetic -- [seed] [joint|block-cyclic]`.

use dtcae::experiment::Prepared;
use dtcae::{Result, SynthSpec, TrainConfig, UpdateMode};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let update_mode: UpdateMode = args.next().as_deref().unwrap_or("joint").parse()?;
    let config = TrainConfig { seed, update_mode, tolerance: 0.0, ..TrainConfig::default() };

    let prepared = Prepared::synthetic(&SynthSpec::default(), seed, config.knn_k)?;
    let outcome = prepared.train(&config)?;
    let tr = &outcome.trajectory;

    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "iter", "aux_cls", "tgt_cls", "attr_map", "dom_match", "neighbor", "total");
    for i in [0, 1, 2, 5, 10, 25, 50, 100, 150, 200].into_iter().filter(|&i| i < tr.len()) {
        let o = &tr[i];
        println!(
            "{i:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            o.aux_cls, o.tgt_cls, o.attr_map, o.dom_match, o.neighbor, o.total
        );
    }

    let steps = tr.len() - 1;
    let descents = tr.windows(2).filter(|w| w[1].total <= w[0].total).count();
    println!("non-increasing steps: {descents}/{steps}");
    println!("final / initial total: {:.4}", outcome.last().total / outcome.initial().total);
    if tr.len() > 200 {
        println!("relative change from iteration 100 to 200: {:.2e}", (tr[200].total - tr[100].total).abs() / tr[100].total);
    }
    println!("target test accuracy: {:.4}", prepared.test_accuracy(&outcome.params)?);
    Ok(())
}
