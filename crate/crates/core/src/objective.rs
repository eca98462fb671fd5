//! The joint training objective and its exact sub-gradient.
//!
//! ```text
//! total = Σ_aux ‖y − scores_t(X)‖² + Σ_labelled-target ‖y − scores_target(X)‖²
//!       + c1 Σ_all ‖attr(X) − mapᵀa‖²
//!       + c2 Σ_{t<u} ‖mean_t − mean_u‖²        mean_t = mean shared encoding of domain t
//!       + c3 Σ_{(i,j) in graph} ‖rep(X_i) − rep(X_j)‖²   over target training points
//! ```
//!
//! Per-point work runs on the ambient rayon pool; every reduction walks
//! domains then points in index order, so results do not depend on the
//! worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataPoint, NeighborGraph, TrainingSet};
use crate::error::{Error, Result};
use crate::model::{embed_attributes, BlockId, ModelParams, Representation, RepresentationTraces};
use crate::numeric::{sq_dist, sq_norm};

/// Tradeoff weights of the three regularisers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Attribute mapping term.
    pub c1: f64,
    /// Cross-domain mean matching term.
    pub c2: f64,
    /// Target neighbour smoothness term.
    pub c3: f64,
}

impl LossWeights {
    pub const ZERO: LossWeights = LossWeights { c1: 0.0, c2: 0.0, c3: 0.0 };

    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        LossWeights { c1, c2, c3 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { c1: 0.85, c2: 0.25, c3: 0.001 }
    }
}

/// Unweighted values of the five terms plus the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub aux_cls: f64,
    pub tgt_cls: f64,
    pub attr_map: f64,
    pub dom_match: f64,
    pub neighbor: f64,
    pub total: f64,
}

impl ObjectiveBreakdown {
    fn from_terms(terms: [f64; 5], w: &LossWeights) -> Self {
        let [aux_cls, tgt_cls, attr_map, dom_match, neighbor] = terms;
        ObjectiveBreakdown {
            aux_cls,
            tgt_cls,
            attr_map,
            dom_match,
            neighbor,
            total: aux_cls + tgt_cls + w.c1 * attr_map + w.c2 * dom_match + w.c3 * neighbor,
        }
    }
}

/// Sub-gradient of the objective, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    inner: ModelParams,
}

impl GradientSet {
    pub fn zeros_like(params: &ModelParams) -> Self {
        GradientSet { inner: ModelParams::zeros(params.dims().clone()).expect("dims already validated") }
    }

    /// The gradient laid out as a model, block for block.
    pub fn as_params(&self) -> &ModelParams {
        &self.inner
    }

    pub fn blocks(&self) -> Vec<(BlockId, &[f64])> {
        self.inner.blocks()
    }

    pub fn blocks_mut(&mut self) -> Vec<(BlockId, &mut [f64])> {
        self.inner.blocks_mut()
    }

    /// All entries of one block, concatenated in storage order.
    pub fn block(&self, id: BlockId) -> Vec<f64> {
        self.blocks()
            .into_iter()
            .filter(|(b, _)| *b == id)
            .flat_map(|(_, s)| s.iter().copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|(_, s)| s.iter().all(|v| v.is_finite()))
    }
}

struct PointForward {
    rep: Representation,
    traces: RepresentationTraces,
}

fn check_inputs(params: &ModelParams, data: &TrainingSet) -> Result<()> {
    let dims = params.dims();
    if dims.domains() != data.domain_count() {
        return Err(Error::shape(
            "objective",
            format!("model has {} domains, data has {}", dims.domains(), data.domain_count()),
        ));
    }
    if (dims.input_dim, dims.attrs, dims.classes) != (data.input_dim(), data.attrs(), data.classes()) {
        return Err(Error::shape(
            "objective",
            format!(
                "model (d, A, Y) = ({}, {}, {}), data = ({}, {}, {})",
                dims.input_dim,
                dims.attrs,
                dims.classes,
                data.input_dim(),
                data.attrs(),
                data.classes()
            ),
        ));
    }
    Ok(())
}

fn check_graph(data: &TrainingSet, graph: &NeighborGraph) -> Result<()> {
    if graph.len() != data.target().len() {
        return Err(Error::shape(
            "neighbor_loss",
            format!("graph over {} points, target has {}", graph.len(), data.target().len()),
        ));
    }
    Ok(())
}

fn forward_all(params: &ModelParams, data: &TrainingSet) -> Result<Vec<Vec<PointForward>>> {
    data.domains()
        .iter()
        .enumerate()
        .map(|(t, pts)| {
            pts.par_iter()
                .map(|p| params.represent(&p.x, t).map(|(rep, traces)| PointForward { rep, traces }))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

fn residual(params: &ModelParams, rep: &Representation, label: usize) -> Result<Vec<f64>> {
    let mut scores = params.classify(rep)?;
    scores[label] -= 1.0;
    Ok(scores)
}

fn attr_residual(params: &ModelParams, rep: &Representation, point: &DataPoint) -> Result<Vec<f64>> {
    let mapped = embed_attributes(params.attr_map(), &point.attrs)?;
    Ok(rep.attr.iter().zip(&mapped).map(|(f, m)| f - m).collect())
}

/// Mean shared-encoder output per domain; `None` for empty domains.
fn domain_means(fwd: &[Vec<PointForward>]) -> Vec<Option<Vec<f64>>> {
    fwd.iter()
        .map(|pts| {
            let first = pts.first()?;
            let mut mean = vec![0.0; first.rep.shared.len()];
            for pf in pts {
                for (m, v) in mean.iter_mut().zip(&pf.rep.shared) {
                    *m += v;
                }
            }
            let n = pts.len() as f64;
            mean.iter_mut().for_each(|m| *m /= n);
            Some(mean)
        })
        .collect()
}

fn terms_from_forward(
    params: &ModelParams,
    data: &TrainingSet,
    graph: &NeighborGraph,
    fwd: &[Vec<PointForward>],
) -> Result<[f64; 5]> {
    let target = data.target_index();
    let mut aux_cls = 0.0;
    let mut tgt_cls = 0.0;
    let mut attr_map = 0.0;
    for (t, (pts, reps)) in data.domains().iter().zip(fwd).enumerate() {
        for (p, pf) in pts.iter().zip(reps) {
            if let Some(label) = p.label {
                let r = sq_norm(&residual(params, &pf.rep, label)?);
                if t == target {
                    tgt_cls += r;
                } else {
                    aux_cls += r;
                }
            }
            attr_map += sq_norm(&attr_residual(params, &pf.rep, p)?);
        }
    }

    let means = domain_means(fwd);
    let mut dom_match = 0.0;
    for t in 0..means.len() {
        for u in t + 1..means.len() {
            if let (Some(a), Some(b)) = (&means[t], &means[u]) {
                dom_match += sq_dist(a, b);
            }
        }
    }

    let concat: Vec<Vec<f64>> = fwd[target].iter().map(|pf| pf.rep.concat()).collect();
    let mut neighbor = 0.0;
    for i in 0..concat.len() {
        for &j in graph.neighbors(i) {
            neighbor += sq_dist(&concat[i], &concat[j]);
        }
    }
    Ok([aux_cls, tgt_cls, attr_map, dom_match, neighbor])
}

/// Squared error of the scores against the one-hot labels, summed over all
/// labelled points (auxiliary plus labelled target).
pub fn classification_loss(params: &ModelParams, data: &TrainingSet) -> Result<f64> {
    check_inputs(params, data)?;
    let fwd = forward_all(params, data)?;
    let graph = NeighborGraph::empty(data.target().len());
    let [aux, tgt, ..] = terms_from_forward(params, data, &graph, &fwd)?;
    Ok(aux + tgt)
}

/// `Σ ‖attr(X) − mapᵀa‖²` over every point of every domain.
pub fn attribute_loss(params: &ModelParams, data: &TrainingSet) -> Result<f64> {
    check_inputs(params, data)?;
    let fwd = forward_all(params, data)?;
    let graph = NeighborGraph::empty(data.target().len());
    Ok(terms_from_forward(params, data, &graph, &fwd)?[2])
}

/// Squared distances between per-domain means of the shared encoder, summed
/// over unordered domain pairs. Every domain must be non-empty.
pub fn domain_matching_loss(params: &ModelParams, data: &TrainingSet) -> Result<f64> {
    check_inputs(params, data)?;
    if let Some(t) = data.domains().iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("domain {t} is empty")));
    }
    let fwd = forward_all(params, data)?;
    let graph = NeighborGraph::empty(data.target().len());
    Ok(terms_from_forward(params, data, &graph, &fwd)?[3])
}

/// `Σ_{i,i'} M_ii' ‖f(X_i) − f(X_i')‖²` over ordered target pairs, where `f`
/// stacks the shared, target and attribute encodings.
pub fn neighbor_loss(params: &ModelParams, data: &TrainingSet, graph: &NeighborGraph) -> Result<f64> {
    check_inputs(params, data)?;
    check_graph(data, graph)?;
    let fwd = forward_all(params, data)?;
    Ok(terms_from_forward(params, data, graph, &fwd)?[4])
}

/// All five terms and the weighted total.
///
/// Empty domains are skipped by the matching term; that is only allowed
/// while `c2 == 0`.
pub fn objective(
    params: &ModelParams,
    data: &TrainingSet,
    graph: &NeighborGraph,
    weights: &LossWeights,
) -> Result<ObjectiveBreakdown> {
    weights.validate()?;
    check_inputs(params, data)?;
    check_graph(data, graph)?;
    check_empty_domains(data, weights)?;
    let fwd = forward_all(params, data)?;
    Ok(ObjectiveBreakdown::from_terms(terms_from_forward(params, data, graph, &fwd)?, weights))
}

fn check_empty_domains(data: &TrainingSet, weights: &LossWeights) -> Result<()> {
    if weights.c2 > 0.0 {
        if let Some(t) = data.domains().iter().position(Vec::is_empty) {
            return Err(Error::InvalidArgument(format!(
                "domain {t} is empty but domain matching weight c2 = {} is active",
                weights.c2
            )));
        }
    }
    Ok(())
}

/// Per-point pieces of the gradient, computed in parallel.
struct PointGrad {
    /// `2 (h − y)`, present for labelled points.
    score_grad: Option<Vec<f64>>,
    /// `2 c1 (attr − mapᵀa)`.
    attr_grad: Vec<f64>,
    shared: (Vec<f64>, Vec<f64>),
    domain: (Vec<f64>, Vec<f64>),
    attr: (Vec<f64>, Vec<f64>),
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// Exact sub-gradient of the weighted objective with respect to every block.
pub fn gradient(
    params: &ModelParams,
    data: &TrainingSet,
    graph: &NeighborGraph,
    weights: &LossWeights,
) -> Result<GradientSet> {
    weights.validate()?;
    check_inputs(params, data)?;
    check_graph(data, graph)?;
    check_empty_domains(data, weights)?;
    let target = data.target_index();
    let fwd = forward_all(params, data)?;

    // upstream into the shared encoder from mean matching, one per domain
    let means = domain_means(&fwd);
    let shared_len = params.dims().shared_filters;
    let match_grad: Vec<Vec<f64>> = (0..means.len())
        .map(|t| {
            let mut g = vec![0.0; shared_len];
            let Some(mt) = &means[t] else { return g };
            let scale = 2.0 * weights.c2 / fwd[t].len() as f64;
            for (u, other) in means.iter().enumerate() {
                if let (true, Some(other)) = (u != t, other) {
                    for k in 0..shared_len {
                        g[k] += scale * (mt[k] - other[k]);
                    }
                }
            }
            g
        })
        .collect();

    // upstream into the stacked target representation from smoothness
    let concat: Vec<Vec<f64>> = fwd[target].iter().map(|pf| pf.rep.concat()).collect();
    let smooth_grad: Vec<Vec<f64>> = (0..concat.len())
        .map(|i| {
            let mut g = vec![0.0; concat[i].len()];
            for &j in graph.neighbors(i) {
                for k in 0..g.len() {
                    g[k] += 4.0 * weights.c3 * (concat[i][k] - concat[j][k]);
                }
            }
            g
        })
        .collect();

    let point_grads: Vec<Vec<PointGrad>> = data
        .domains()
        .iter()
        .zip(&fwd)
        .enumerate()
        .map(|(t, (pts, reps))| {
            pts.par_iter()
                .zip(reps.par_iter())
                .enumerate()
                .map(|(i, (p, pf))| {
                    let smooth = (t == target).then(|| smooth_grad[i].as_slice());
                    point_gradient(params, t, p, pf, weights, &match_grad[t], smooth)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut grad = GradientSet::zeros_like(params);
    let g = &mut grad.inner;
    for (t, ((pts, reps), pgs)) in data.domains().iter().zip(&fwd).zip(&point_grads).enumerate() {
        for ((p, pf), pg) in pts.iter().zip(reps).zip(pgs) {
            add_into(g.shared_conv.weights_mut(), &pg.shared.0);
            add_into(g.shared_conv.bias_mut(), &pg.shared.1);
            add_into(g.domain_convs[t].weights_mut(), &pg.domain.0);
            add_into(g.domain_convs[t].bias_mut(), &pg.domain.1);
            add_into(g.attr_conv.weights_mut(), &pg.attr.0);
            add_into(g.attr_conv.bias_mut(), &pg.attr.1);
            if let Some(dh) = &pg.score_grad {
                add_outer(&mut g.shared_head, &pf.rep.shared, dh);
                add_outer(&mut g.domain_heads[t], &pf.rep.domain, dh);
                add_outer(&mut g.attr_head, &pf.rep.attr, dh);
            }
            for (k, &bit) in p.attrs.iter().enumerate() {
                if bit == 1 {
                    for (j, v) in pg.attr_grad.iter().enumerate() {
                        g.attr_map[(k, j)] -= v;
                    }
                }
            }
        }
    }
    Ok(grad)
}

fn add_outer(acc: &mut crate::numeric::Matrix, left: &[f64], right: &[f64]) {
    for (i, &l) in left.iter().enumerate() {
        for (j, &r) in right.iter().enumerate() {
            acc[(i, j)] += l * r;
        }
    }
}

fn point_gradient(
    params: &ModelParams,
    t: usize,
    point: &DataPoint,
    pf: &PointForward,
    weights: &LossWeights,
    match_grad: &[f64],
    smooth_grad: Option<&[f64]>,
) -> Result<PointGrad> {
    let rep = &pf.rep;
    let mut up_shared = match_grad.to_vec();
    let mut up_domain = vec![0.0; rep.domain.len()];
    let mut up_attr = vec![0.0; rep.attr.len()];

    let score_grad = match point.label {
        Some(label) => {
            let dh: Vec<f64> = residual(params, rep, label)?.iter().map(|e| 2.0 * e).collect();
            add_into(&mut up_shared, &params.shared_head().matvec(&dh)?);
            add_into(&mut up_domain, &params.domain_head(t).matvec(&dh)?);
            add_into(&mut up_attr, &params.attr_head().matvec(&dh)?);
            Some(dh)
        }
        None => None,
    };

    let attr_grad: Vec<f64> =
        attr_residual(params, rep, point)?.iter().map(|e| 2.0 * weights.c1 * e).collect();
    add_into(&mut up_attr, &attr_grad);

    if let Some(s) = smooth_grad {
        let (m0, mt) = (rep.shared.len(), rep.domain.len());
        add_into(&mut up_shared, &s[..m0]);
        add_into(&mut up_domain, &s[m0..m0 + mt]);
        add_into(&mut up_attr, &s[m0 + mt..]);
    }

    let conv_grad = |block: &crate::convnet::ConvBlock, trace, up: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut w = vec![0.0; block.weights().len()];
        let mut b = vec![0.0; block.filters()];
        block.accumulate(trace, up, &mut w, &mut b, None)?;
        Ok((w, b))
    };
    Ok(PointGrad {
        score_grad,
        shared: conv_grad(params.shared_conv(), &pf.traces.shared, &up_shared)?,
        domain: conv_grad(params.domain_conv(t), &pf.traces.domain, &up_domain)?,
        attr: conv_grad(params.attr_conv(), &pf.traces.attr, &up_attr)?,
        attr_grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dims;
    use crate::numeric::{Matrix, Rng};

    fn dims(domains: usize) -> Dims {
        Dims {
            input_dim: 2,
            attrs: 3,
            classes: 2,
            shared_filters: 2,
            attr_filters: 2,
            domain_filters: vec![2; domains],
            width: 1,
        }
    }

    fn point(rows: &[Vec<f64>], attrs: &[u8], label: Option<usize>) -> DataPoint {
        DataPoint::new(Matrix::from_rows(rows).unwrap(), attrs.to_vec(), label)
    }

    /// Shared encoder that copies the (single-column) input through ReLU.
    fn identity_shared(params: &mut ModelParams) {
        let w = params.shared_conv.weights_mut();
        w.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_model_classification_is_label_norm() {
        let params = ModelParams::zeros(dims(2)).unwrap();
        let data = TrainingSet::new(
            2,
            3,
            2,
            vec![vec![point(&[vec![1.0], vec![2.0]], &[1, 0, 0], Some(1))], vec![]],
        )
        .unwrap();
        assert_eq!(classification_loss(&params, &data).unwrap(), 1.0);
        assert_eq!(attribute_loss(&params, &data).unwrap(), 0.0);
        assert!(domain_matching_loss(&params, &data).is_err());
    }

    #[test]
    fn attribute_loss_without_map_is_embedding_norm() {
        let mut params = ModelParams::zeros(dims(2)).unwrap();
        params.attr_conv.weights_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        let x = vec![vec![3.0], vec![4.0]];
        let data = TrainingSet::new(2, 3, 2, vec![vec![point(&x, &[1, 1, 0], Some(0))], vec![]]).unwrap();
        assert_eq!(attribute_loss(&params, &data).unwrap(), 25.0);
    }

    #[test]
    fn matching_loss_of_constant_encodings() {
        let mut params = ModelParams::zeros(dims(2)).unwrap();
        identity_shared(&mut params);
        let u = [1.0, 2.0];
        let v = [3.0, 0.5];
        let aux: Vec<DataPoint> =
            (0..3).map(|_| point(&[vec![u[0]], vec![u[1]]], &[0, 0, 0], Some(0))).collect();
        let tgt: Vec<DataPoint> =
            (0..2).map(|_| point(&[vec![v[0]], vec![v[1]]], &[0, 0, 0], None)).collect();
        let data = TrainingSet::new(2, 3, 2, vec![aux.clone(), tgt]).unwrap();
        let expected = (1.0f64 - 3.0).powi(2) + (2.0f64 - 0.5).powi(2);
        assert_eq!(domain_matching_loss(&params, &data).unwrap(), expected);

        let same = TrainingSet::new(2, 3, 2, vec![aux.clone(), aux]).unwrap();
        assert_eq!(domain_matching_loss(&params, &same).unwrap(), 0.0);
    }

    #[test]
    fn neighbor_loss_counts_ordered_pairs() {
        let mut params = ModelParams::zeros(dims(2)).unwrap();
        identity_shared(&mut params);
        let a = point(&[vec![1.0], vec![0.0]], &[0, 0, 0], None);
        let b = point(&[vec![0.0], vec![1.0]], &[0, 0, 0], None);
        let aux = vec![point(&[vec![0.0], vec![0.0]], &[0, 0, 0], Some(0))];
        let data = TrainingSet::new(2, 3, 2, vec![aux.clone(), vec![a.clone(), b]]).unwrap();
        let g = NeighborGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(neighbor_loss(&params, &data, &g).unwrap(), 4.0);
        assert_eq!(neighbor_loss(&params, &data, &NeighborGraph::empty(2)).unwrap(), 0.0);
        assert!(neighbor_loss(&params, &data, &NeighborGraph::empty(3)).is_err());

        let twins = TrainingSet::new(2, 3, 2, vec![aux, vec![a.clone(), a]]).unwrap();
        assert_eq!(neighbor_loss(&params, &twins, &g).unwrap(), 0.0);
    }

    #[test]
    fn zero_weights_no_labels_give_zero_gradient() {
        let params = ModelParams::init(dims(2), 0.5, &mut Rng::new(1)).unwrap();
        let tgt = vec![
            point(&[vec![0.3], vec![-0.2]], &[1, 0, 1], None),
            point(&[vec![0.1], vec![0.7]], &[0, 1, 1], None),
        ];
        let data = TrainingSet::new(2, 3, 2, vec![vec![], tgt]).unwrap();
        let graph = NeighborGraph::from_edges(2, &[(0, 1)]).unwrap();
        let g = gradient(&params, &data, &graph, &LossWeights::ZERO).unwrap();
        assert!(g.blocks().iter().all(|(_, s)| s.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn objective_is_linear_in_weights() {
        let params = ModelParams::init(dims(2), 0.5, &mut Rng::new(2)).unwrap();
        let aux = vec![point(&[vec![0.4, 1.0], vec![0.1, -0.3]], &[1, 0, 0], Some(0))];
        let tgt = vec![
            point(&[vec![0.3], vec![-0.2]], &[1, 0, 1], Some(1)),
            point(&[vec![0.9], vec![0.7]], &[0, 1, 1], None),
        ];
        let data = TrainingSet::new(2, 3, 2, vec![aux, tgt]).unwrap();
        let graph = NeighborGraph::from_edges(2, &[(0, 1)]).unwrap();
        let base = objective(&params, &data, &graph, &LossWeights::new(1.0, 2.0, 3.0)).unwrap();
        let doubled = objective(&params, &data, &graph, &LossWeights::new(1.0, 2.0, 6.0)).unwrap();
        assert!((doubled.total - base.total - 3.0 * base.neighbor).abs() < 1e-12);
        assert_eq!(base, objective(&params, &data, &graph, &LossWeights::new(1.0, 2.0, 3.0)).unwrap());
        assert!(objective(&params, &data, &graph, &LossWeights::new(-1.0, 0.0, 0.0)).is_err());
    }
}
