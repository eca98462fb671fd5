//! Training on the standard synthetic dataset.

use dtcae::experiment::Prepared;
use dtcae::{SynthSpec, TrainConfig, UpdateMode};

fn standard(seed: u64) -> Prepared {
    Prepared::synthetic(&SynthSpec::default(), seed, TrainConfig::default().knn_k).unwrap()
}

#[test]
fn joint_descent_halves_the_objective() {
    for seed in [0, 3] {
        let config = TrainConfig { seed, ..TrainConfig::default() };
        let out = standard(seed).train(&config).unwrap();
        assert_eq!(config.update_mode, UpdateMode::Joint);
        assert!(out.last().total <= 0.5 * out.initial().total, "seed {seed}: {} -> {}", out.initial().total, out.last().total);
    }
}

#[test]
fn block_cyclic_descent_also_reduces_the_objective() {
    let config = TrainConfig { update_mode: UpdateMode::BlockCyclic, max_iters: 50, ..TrainConfig::default() };
    let out = standard(2).train(&config).unwrap();
    assert!(out.last().total < out.initial().total);
}

#[test]
fn trained_model_beats_chance_on_target_test_points() {
    let prepared = standard(4);
    let out = prepared.train(&TrainConfig { seed: 4, ..TrainConfig::default() }).unwrap();
    let acc = prepared.test_accuracy(&out.params).unwrap();
    assert!(acc > 0.5, "{acc}");
}

#[test]
fn early_stop_ends_a_flat_run() {
    let config = TrainConfig { tau: 0.0, ..TrainConfig::default() };
    let out = standard(0).train(&config).unwrap();
    assert!(out.stopped_early);
    assert_eq!(out.iterations(), 1);
}
