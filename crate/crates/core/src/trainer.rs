//! Fixed-step sub-gradient descent over the whole parameter set, plus
//! accuracy evaluation and the per-iteration curve export.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::dataset::{DataPoint, NeighborGraph, TrainingSet};
use crate::error::{Error, Result};
use crate::model::{predict, BlockId, Dims, ModelParams};
use crate::numeric::Rng;
use crate::objective::{gradient, objective, GradientSet, LossWeights, ObjectiveBreakdown};

/// Stream id reserved for parameter initialisation.
const INIT_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// One step on the full gradient per iteration.
    #[default]
    Joint,
    /// Per iteration, one step per parameter block in sweep order, with the
    /// gradient recomputed before each block.
    BlockCyclic,
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::Joint => "joint",
            UpdateMode::BlockCyclic => "block-cyclic",
        })
    }
}

impl FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(UpdateMode::Joint),
            "block-cyclic" => Ok(UpdateMode::BlockCyclic),
            other => Err(Error::InvalidArgument(format!(
                "update mode '{other}' is not one of joint, block-cyclic"
            ))),
        }
    }
}

/// Encoder sizes; data dimensions come from the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub shared_filters: usize,
    pub attr_filters: usize,
    /// One entry per domain, or a single entry used for every domain.
    pub domain_filters: Vec<usize>,
    pub width: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture { shared_filters: 8, attr_filters: 8, domain_filters: vec![8], width: 3 }
    }
}

impl Architecture {
    pub fn dims_for(&self, data: &TrainingSet) -> Result<Dims> {
        let domains = data.domain_count();
        let domain_filters = match self.domain_filters.as_slice() {
            [m] => vec![*m; domains],
            list if list.len() == domains => list.to_vec(),
            list => {
                return Err(Error::InvalidArgument(format!(
                    "{} domain filter counts for {domains} domains",
                    list.len()
                )))
            }
        };
        let dims = Dims {
            input_dim: data.input_dim(),
            attrs: data.attrs(),
            classes: data.classes(),
            shared_filters: self.shared_filters,
            attr_filters: self.attr_filters,
            domain_filters,
            width: self.width,
        };
        dims.validate()?;
        Ok(dims)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub weights: LossWeights,
    /// Descent step.
    pub tau: f64,
    pub max_iters: usize,
    pub update_mode: UpdateMode,
    /// Stop once the relative change of the total falls below this.
    pub tolerance: f64,
    /// Neighbours per target point in the smoothness graph.
    pub knn_k: usize,
    pub arch: Architecture,
    /// Half-width of the uniform initialisation interval.
    pub init_range: f64,
    pub seed: u64,
    /// Worker threads for per-point computation. Results do not depend on it.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            weights: LossWeights::default(),
            tau: 5e-4,
            max_iters: 200,
            update_mode: UpdateMode::Joint,
            tolerance: 1e-6,
            knn_k: 5,
            arch: Architecture::default(),
            init_range: 0.1,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(Error::InvalidArgument(format!("tau = {} must be finite and >= 0", self.tau)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidArgument("tolerance must be >= 0".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Seeded initial parameters for `data`.
    pub fn init_params(&self, data: &TrainingSet) -> Result<ModelParams> {
        let dims = self.arch.dims_for(data)?;
        ModelParams::init(dims, self.init_range, &mut Rng::with_stream(self.seed, INIT_STREAM))
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Objective before training (entry 0) and after each iteration.
    pub trajectory: Vec<ObjectiveBreakdown>,
    pub stopped_early: bool,
}

impl TrainOutcome {
    pub fn iterations(&self) -> usize {
        self.trajectory.len() - 1
    }

    pub fn initial(&self) -> &ObjectiveBreakdown {
        &self.trajectory[0]
    }

    pub fn last(&self) -> &ObjectiveBreakdown {
        self.trajectory.last().expect("trajectory holds the initial value")
    }
}

fn step(params: &mut ModelParams, grad: &GradientSet, tau: f64, only: Option<BlockId>) {
    for ((id, p), (_, g)) in params.blocks_mut().into_iter().zip(grad.blocks()) {
        if only.is_some_and(|b| b != id) {
            continue;
        }
        for (pv, gv) in p.iter_mut().zip(g) {
            *pv -= tau * gv;
        }
    }
}

/// Trains from seeded initial parameters.
pub fn train(data: &TrainingSet, graph: &NeighborGraph, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_observer(data, graph, config, |_, _, _| {})
}

/// Like [`train`], calling `observe(iteration, params, objective)` for the
/// initial state (iteration 0) and after every iteration.
pub fn train_with_observer<F>(
    data: &TrainingSet,
    graph: &NeighborGraph,
    config: &TrainConfig,
    observe: F,
) -> Result<TrainOutcome>
where
    F: FnMut(usize, &ModelParams, &ObjectiveBreakdown) + Send,
{
    config.validate()?;
    let params = config.init_params(data)?;
    train_from(params, data, graph, config, observe)
}

/// Runs the descent loop from the given parameters.
pub fn train_from<F>(
    mut params: ModelParams,
    data: &TrainingSet,
    graph: &NeighborGraph,
    config: &TrainConfig,
    mut observe: F,
) -> Result<TrainOutcome>
where
    F: FnMut(usize, &ModelParams, &ObjectiveBreakdown) + Send,
{
    config.validate()?;
    if data.labeled_target_count() == 0 {
        return Err(Error::InvalidArgument("target domain has no labelled training points".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {} workers: {e}", config.workers)))?;
    pool.install(|| {
        let weights = &config.weights;
        let first = objective(&params, data, graph, weights)?;
        if !first.total.is_finite() {
            return Err(Error::Divergence { iteration: 0 });
        }
        observe(0, &params, &first);
        let mut trajectory = vec![first];
        let mut stopped_early = false;
        let sweep = BlockId::sweep_order(params.dims().domains());

        for iter in 1..=config.max_iters {
            match config.update_mode {
                UpdateMode::Joint => {
                    let grad = gradient(&params, data, graph, weights)?;
                    step(&mut params, &grad, config.tau, None);
                }
                UpdateMode::BlockCyclic => {
                    for &block in &sweep {
                        let grad = gradient(&params, data, graph, weights)?;
                        step(&mut params, &grad, config.tau, Some(block));
                    }
                }
            }
            let current = objective(&params, data, graph, weights)?;
            if !current.total.is_finite() {
                return Err(Error::Divergence { iteration: iter });
            }
            observe(iter, &params, &current);
            let previous = trajectory.last().expect("non-empty").total;
            trajectory.push(current);
            let change = (current.total - previous).abs() / previous.abs().max(f64::MIN_POSITIVE);
            if change < config.tolerance {
                stopped_early = iter < config.max_iters;
                break;
            }
        }
        Ok(TrainOutcome { params, trajectory, stopped_early })
    })
}

/// Fraction of `points` whose predicted class (as domain `t`) matches the label.
pub fn evaluate(params: &ModelParams, points: &[&DataPoint], t: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on an empty collection".into()));
    }
    let mut correct = 0usize;
    for (i, p) in points.iter().enumerate() {
        let label = p
            .label
            .ok_or_else(|| Error::InvalidArgument(format!("evaluation point {i} has no label")))?;
        if params.predict_point(&p.x, t)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / points.len() as f64)
}

/// Predicted class for every point, as domain `t`.
pub fn predictions(params: &ModelParams, points: &[&DataPoint], t: usize) -> Result<Vec<usize>> {
    points
        .iter()
        .map(|p| {
            let (rep, _) = params.represent(&p.x, t)?;
            Ok(predict(&params.classify(&rep)?))
        })
        .collect()
}

pub const CURVE_HEADER: &str = "iter,aux_cls,tgt_cls,attr_map,dom_match,neighbor,total,target_test_accuracy";

/// Writes the per-iteration curve; `accuracy[i]` belongs to `trajectory[i]`.
pub fn write_curve_csv(
    mut out: impl Write,
    trajectory: &[ObjectiveBreakdown],
    accuracy: &[f64],
) -> std::io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for (i, (o, acc)) in trajectory.iter().zip(accuracy).enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{},{},{}",
            o.aux_cls, o.tgt_cls, o.attr_map, o.dom_match, o.neighbor, o.total, acc
        )?;
    }
    Ok(())
}

pub fn save_curve_csv(path: impl AsRef<Path>, trajectory: &[ObjectiveBreakdown], accuracy: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, trajectory, accuracy).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
