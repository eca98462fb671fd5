//! A very large weight on one penalty drives that term towards zero. Trains
//! the standard data with the domain-matching weight, then the attribute-map
//! weight, raised to 1e3 and prints each term before and after. The step is
//! shrunk in proportion so the descent stays stable.
//!
//! Run with `cargo run --release --example strong_penalties`.

use dtcae::experiment::Prepared;
use dtcae::{LossWeights, ObjectiveBreakdown, Result, SynthSpec, TrainConfig};

fn show(label: &str, o: &ObjectiveBreakdown) {
    println!(
        "  {label:<7} aux {:>9.3}  tgt {:>8.3}  attr {:>10.4}  match {:>8.5}  neighbor {:>7.3}",
        o.aux_cls, o.tgt_cls, o.attr_map, o.dom_match, o.neighbor
    );
}

fn main() -> Result<()> {
    let base = TrainConfig { tolerance: 0.0, ..TrainConfig::default() };
    let prepared = Prepared::synthetic(&SynthSpec::default(), 0, base.knn_k)?;
    let w = base.weights;
    let runs = [
        ("default weights", base.weights, base.tau),
        ("domain matching weight 1e3", LossWeights::new(w.c1, 1e3, w.c3), 2e-6),
        ("attribute map weight 1e3", LossWeights::new(1e3, w.c2, w.c3), 1e-6),
    ];
    for (name, weights, tau) in runs {
        let out = prepared.train(&TrainConfig { weights, tau, ..base.clone() })?;
        println!("{name} (tau {tau:.0e}):");
        show("initial", out.initial());
        show("final", out.last());
    }
    Ok(())
}
