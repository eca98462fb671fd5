//! The run protocol shared by the CLI, the examples and the acceptance
//! tests: split the target domain, build the training view and the target
//! neighbour graph, train, and score on the held-out target points.

use crate::dataset::{
    build_neighbor_graph, generate_synthetic, split_target, MultiDomainDataset, NeighborGraph, Role, SynthSpec,
    TrainingSet,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numeric::Matrix;
use crate::objective::LossWeights;
use crate::trainer::{evaluate, train, TrainConfig, TrainOutcome};

/// A dataset with target roles assigned, plus what training needs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: MultiDomainDataset,
    pub training: TrainingSet,
    pub graph: NeighborGraph,
}

/// Keeps the target roles stored in `dataset`, or splits the target with
/// `seed` when it has none.
pub fn assign_roles(dataset: MultiDomainDataset, seed: u64) -> Result<MultiDomainDataset> {
    let target = dataset.target();
    let with_role = target.points.iter().filter(|p| p.role.is_some()).count();
    if with_role == target.points.len() {
        return Ok(dataset);
    }
    if with_role > 0 {
        return Err(Error::data(
            format!("domain '{}'", target.id),
            format!("{with_role} of {} target points have roles; give all or none", target.points.len()),
        ));
    }
    let roles = split_target(target.points.len(), seed)?;
    dataset.with_target_roles(&roles)
}

/// Neighbour graph over the target points of `training`, compared by the
/// mean of their instance columns.
pub fn target_graph(training: &TrainingSet, k: usize) -> Result<NeighborGraph> {
    let columns: Vec<&Matrix> = training.target().iter().map(|p| &p.x).collect();
    build_neighbor_graph(&columns, k)
}

impl Prepared {
    pub fn new(dataset: MultiDomainDataset, seed: u64, knn_k: usize) -> Result<Self> {
        let dataset = assign_roles(dataset, seed)?;
        let training = dataset.training_set()?;
        let graph = target_graph(&training, knn_k)?;
        Ok(Prepared { dataset, training, graph })
    }

    /// Generates a synthetic dataset and prepares it, all from one seed.
    pub fn synthetic(spec: &SynthSpec, seed: u64, knn_k: usize) -> Result<Self> {
        Prepared::new(generate_synthetic(spec, seed)?, seed, knn_k)
    }

    /// Same target split with the auxiliary domains emptied.
    pub fn target_only(&self) -> Prepared {
        Prepared { training: self.training.target_only(), ..self.clone() }
    }

    pub fn train(&self, config: &TrainConfig) -> Result<TrainOutcome> {
        train(&self.training, &self.graph, config)
    }

    /// Accuracy on the target test points.
    pub fn test_accuracy(&self, params: &ModelParams) -> Result<f64> {
        evaluate(params, &self.dataset.target_points(Role::Test), self.dataset.target_index())
    }
}

/// One seed of the transfer comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferRun {
    pub seed: u64,
    /// Target test accuracy of the full model.
    pub full: f64,
    /// Target test accuracy with every penalty weight zero and no auxiliary data.
    pub baseline: f64,
}

impl TransferRun {
    pub fn gain(&self) -> f64 {
        self.full - self.baseline
    }
}

/// Trains the full model and the target-only baseline on the same data,
/// split and initialisation seed, for every seed in `seeds`.
pub fn transfer_comparison(
    spec: &SynthSpec,
    config: &TrainConfig,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<TransferRun>> {
    seeds
        .into_iter()
        .map(|seed| {
            let prepared = Prepared::synthetic(spec, seed, config.knn_k)?;
            let full_cfg = TrainConfig { seed, ..config.clone() };
            let full = prepared.test_accuracy(&prepared.train(&full_cfg)?.params)?;
            let base_cfg = TrainConfig { seed, weights: LossWeights::ZERO, ..config.clone() };
            let baseline_data = prepared.target_only();
            let baseline = baseline_data.test_accuracy(&baseline_data.train(&base_cfg)?.params)?;
            Ok(TransferRun { seed, full, baseline })
        })
        .collect()
}

/// Mean of the paired accuracy differences.
pub fn mean_gain(runs: &[TransferRun]) -> f64 {
    runs.iter().map(TransferRun::gain).sum::<f64>() / runs.len() as f64
}
