//! Central finite-difference verification of the analytic sub-gradient.
//!
//! Instances are drawn at random and rejected until no pooled pre-activation
//! sits within `kink_margin` of the ReLU kink or of a runner-up window, so the
//! objective is differentiable in a neighbourhood of the check point.

use std::fmt;

use crate::dataset::{DataPoint, NeighborGraph, TrainingSet};
use crate::error::{Error, Result};
use crate::model::{BlockId, Dims, ModelParams};
use crate::numeric::{Matrix, Rng};
use crate::objective::{gradient, objective, GradientSet, LossWeights};

/// Denominator floor in [`relative_error`], reached only by coordinates that
/// are zero up to round-off (dead filters, unused rows).
pub const RELATIVE_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckSpec {
    pub domains: usize,
    pub points_per_domain: usize,
    pub input_dim: usize,
    pub attrs: usize,
    pub classes: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub filters: usize,
    pub width: usize,
    /// Parameters are drawn uniformly from `[-param_range, param_range)`.
    pub param_range: f64,
    pub weights: LossWeights,
    pub eps: f64,
    pub kink_margin: f64,
    pub tolerance: f64,
}

impl Default for GradCheckSpec {
    fn default() -> Self {
        GradCheckSpec {
            domains: 3,
            points_per_domain: 4,
            input_dim: 6,
            attrs: 5,
            classes: 3,
            min_len: 3,
            max_len: 6,
            filters: 4,
            width: 2,
            param_range: 0.5,
            weights: LossWeights::new(1.0, 1.0, 1.0),
            eps: 1e-5,
            kink_margin: 1e-3,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradCheckInstance {
    pub params: ModelParams,
    pub data: TrainingSet,
    pub graph: NeighborGraph,
    pub weights: LossWeights,
}

/// Distance of the closest pooled pre-activation to a non-differentiable
/// point, over every encoder evaluation the objective performs.
pub fn kink_distance(params: &ModelParams, data: &TrainingSet) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for (t, pts) in data.domains().iter().enumerate() {
        for p in pts {
            let (_, traces) = params.represent(&p.x, t)?;
            for trace in [&traces.shared, &traces.domain, &traces.attr] {
                let pre = &trace.pre_activation;
                for j in 0..pre.rows() {
                    let best = trace.argmax[j];
                    margin = margin.min(pre[(j, best)].abs());
                    for q in (0..pre.cols()).filter(|&q| q != best) {
                        margin = margin.min(pre[(j, best)] - pre[(j, q)]);
                    }
                }
            }
        }
    }
    Ok(margin)
}

fn random_instance(spec: &GradCheckSpec, rng: &mut Rng) -> Result<GradCheckInstance> {
    let mut domains = Vec::with_capacity(spec.domains);
    for t in 0..spec.domains {
        let is_target = t + 1 == spec.domains;
        let mut pts = Vec::with_capacity(spec.points_per_domain);
        for i in 0..spec.points_per_domain {
            let len = rng.range_inclusive(spec.min_len, spec.max_len);
            let data: Vec<f64> = (0..spec.input_dim * len).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let x = Matrix::from_vec(spec.input_dim, len, data)?;
            let attrs = (0..spec.attrs).map(|_| u8::from(rng.bernoulli(0.5))).collect();
            let label = rng.below(spec.classes);
            // the target keeps its first point labelled and half the rest
            let labeled = !is_target || i == 0 || rng.bernoulli(0.5);
            pts.push(DataPoint::new(x, attrs, labeled.then_some(label)));
        }
        domains.push(pts);
    }
    let data = TrainingSet::new(spec.input_dim, spec.attrs, spec.classes, domains)?;
    let n = spec.points_per_domain;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.bernoulli(0.5) {
                edges.push((i, j));
            }
        }
    }
    let graph = NeighborGraph::from_edges(n, &edges)?;
    let dims = Dims {
        input_dim: spec.input_dim,
        attrs: spec.attrs,
        classes: spec.classes,
        shared_filters: spec.filters,
        attr_filters: spec.filters,
        domain_filters: vec![spec.filters; spec.domains],
        width: spec.width,
    };
    let params = ModelParams::init(dims, spec.param_range, rng)?;
    Ok(GradCheckInstance { params, data, graph, weights: spec.weights })
}

/// Draws instances until one keeps every pooled pre-activation at least
/// `spec.kink_margin` away from a kink.
pub fn random_smooth_instance(spec: &GradCheckSpec, rng: &mut Rng) -> Result<GradCheckInstance> {
    for _ in 0..10_000 {
        let inst = random_instance(spec, rng)?;
        if kink_distance(&inst.params, &inst.data)? >= spec.kink_margin {
            return Ok(inst);
        }
    }
    Err(Error::InvalidArgument("no smooth instance found in 10000 draws".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockError {
    pub block: BlockId,
    pub max_relative_error: f64,
    pub coordinates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockError>,
}

impl GradCheckReport {
    pub fn max_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_relative_error).fold(0.0, f64::max)
    }

    /// First block (in report order) whose error reaches `tolerance`.
    pub fn first_failure(&self, tolerance: f64) -> Option<&BlockError> {
        self.blocks.iter().find(|b| b.max_relative_error.is_nan() || b.max_relative_error >= tolerance)
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.first_failure(tolerance).is_none()
    }

    /// Error if any block is at or above `tolerance`.
    pub fn ensure(&self, tolerance: f64) -> Result<()> {
        match self.first_failure(tolerance) {
            None => Ok(()),
            Some(b) => Err(Error::GradCheck { block: b.block.to_string(), error: b.max_relative_error }),
        }
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            writeln!(f, "{:<6} {:>5} coords  max rel err {:.3e}", b.block.to_string(), b.coordinates, b.max_relative_error)?;
        }
        Ok(())
    }
}

/// Checks the library gradient on `inst`.
pub fn check_gradient(inst: &GradCheckInstance, eps: f64) -> Result<GradCheckReport> {
    check_gradient_with(inst, eps, gradient)
}

/// Checks an arbitrary gradient routine against central differences of the
/// library objective.
pub fn check_gradient_with<G>(inst: &GradCheckInstance, eps: f64, grad_fn: G) -> Result<GradCheckReport>
where
    G: Fn(&ModelParams, &TrainingSet, &NeighborGraph, &LossWeights) -> Result<GradientSet>,
{
    let analytic = grad_fn(&inst.params, &inst.data, &inst.graph, &inst.weights)?;
    let total = |p: &ModelParams| -> Result<f64> {
        Ok(objective(p, &inst.data, &inst.graph, &inst.weights)?.total)
    };

    let layout: Vec<(BlockId, usize)> = inst.params.blocks().iter().map(|(b, s)| (*b, s.len())).collect();
    let analytic_flat: Vec<&[f64]> = analytic.blocks().into_iter().map(|(_, s)| s).collect();
    let mut report: Vec<BlockError> = Vec::new();
    for (slot, &(block, len)) in layout.iter().enumerate() {
        let mut worst = 0.0f64;
        for k in 0..len {
            let mut plus = inst.params.clone();
            plus.blocks_mut()[slot].1[k] += eps;
            let mut minus = inst.params.clone();
            minus.blocks_mut()[slot].1[k] -= eps;
            let numeric = (total(&plus)? - total(&minus)?) / (2.0 * eps);
            let err = relative_error(analytic_flat[slot][k], numeric);
            worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
        }
        match report.iter_mut().find(|b| b.block == block) {
            Some(entry) => {
                entry.max_relative_error = entry.max_relative_error.max(worst);
                entry.coordinates += len;
            }
            None => report.push(BlockError { block, max_relative_error: worst, coordinates: len }),
        }
    }
    report.sort_by_key(|b| b.block);
    Ok(GradCheckReport { blocks: report })
}

/// Runs `instances` independent checks and merges them block by block.
pub fn run_suite(spec: &GradCheckSpec, instances: usize, seed: u64) -> Result<GradCheckReport> {
    let mut rng = Rng::with_stream(seed, 3);
    let mut merged: Vec<BlockError> = Vec::new();
    for _ in 0..instances {
        let inst = random_smooth_instance(spec, &mut rng)?;
        for b in check_gradient(&inst, spec.eps)?.blocks {
            match merged.iter_mut().find(|m| m.block == b.block) {
                Some(m) => {
                    m.max_relative_error = m.max_relative_error.max(b.max_relative_error);
                    m.coordinates += b.coordinates;
                }
                None => merged.push(b),
            }
        }
    }
    Ok(GradCheckReport { blocks: merged })
}
