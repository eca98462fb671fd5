//! Naive reimplementations shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use dtcae::dataset::{DataPoint, NeighborGraph, TrainingSet};
use dtcae::{objective, ConvBlock, Dims, LossWeights, Matrix, ModelParams, Rng};

/// Conv weights as `[filter][row][offset]`.
pub type Filters = Vec<Vec<Vec<f64>>>;

pub fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

/// Max-pooled ReLU convolution written directly from the definition.
/// `w[j][r][o]`, `x[r][c]`.
pub fn naive_conv(w: &[Vec<Vec<f64>>], b: &[f64], x: &[Vec<f64>]) -> Vec<f64> {
    let width = w[0][0].len();
    let len = x[0].len();
    let padded_len = len.max(width);
    let at = |r: usize, c: usize| if c < len { x[r][c] } else { 0.0 };
    let mut out = Vec::new();
    for j in 0..w.len() {
        let mut best = f64::NEG_INFINITY;
        for p in 0..=padded_len - width {
            let mut s = b[j];
            for r in 0..x.len() {
                for o in 0..width {
                    s += w[j][r][o] * at(r, p + o);
                }
            }
            if s > best {
                best = s;
            }
        }
        out.push(if best > 0.0 { best } else { 0.0 });
    }
    out
}

pub fn unpack_conv(c: &ConvBlock) -> (Filters, Vec<f64>) {
    let w = (0..c.filters())
        .map(|j| (0..c.in_dim()).map(|r| (0..c.width()).map(|o| c.weight(j, r, o)).collect()).collect())
        .collect();
    (w, c.bias().to_vec())
}

pub fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// Everything the naive objective needs, copied out of the model.
pub struct Plain {
    attr: (Filters, Vec<f64>),
    shared: (Filters, Vec<f64>),
    domain: Vec<(Filters, Vec<f64>)>,
    attr_map: Vec<Vec<f64>>,
    shared_head: Vec<Vec<f64>>,
    attr_head: Vec<Vec<f64>>,
    domain_heads: Vec<Vec<Vec<f64>>>,
}

impl Plain {
    pub fn of(p: &ModelParams) -> Self {
        let t = p.dims().domains();
        Plain {
            attr: unpack_conv(p.attr_conv()),
            shared: unpack_conv(p.shared_conv()),
            domain: (0..t).map(|i| unpack_conv(p.domain_conv(i))).collect(),
            attr_map: rows(p.attr_map()),
            shared_head: rows(p.shared_head()),
            attr_head: rows(p.attr_head()),
            domain_heads: (0..t).map(|i| rows(p.domain_head(i))).collect(),
        }
    }

    /// (shared, domain, attribute) encodings of `x` as domain `t`.
    pub fn encode(&self, x: &[Vec<f64>], t: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            naive_conv(&self.shared.0, &self.shared.1, x),
            naive_conv(&self.domain[t].0, &self.domain[t].1, x),
            naive_conv(&self.attr.0, &self.attr.1, x),
        )
    }

    pub fn scores(&self, x: &[Vec<f64>], t: usize) -> Vec<f64> {
        let (shared_rep, domain_rep, attr_rep) = self.encode(x, t);
        let classes = self.shared_head[0].len();
        (0..classes)
            .map(|c| {
                let a: f64 = (0..shared_rep.len()).map(|k| self.shared_head[k][c] * shared_rep[k]).sum();
                let b: f64 = (0..domain_rep.len()).map(|k| self.domain_heads[t][k][c] * domain_rep[k]).sum();
                let d: f64 = (0..attr_rep.len()).map(|k| self.attr_head[k][c] * attr_rep[k]).sum();
                a + b + d
            })
            .collect()
    }

    /// The five unweighted terms in one pass over the data.
    pub fn terms(&self, data: &TrainingSet, graph: &[Vec<bool>]) -> [f64; 5] {
        let target = data.domains().len() - 1;
        let mut aux = 0.0;
        let mut tgt = 0.0;
        let mut attr = 0.0;
        let mut means: Vec<Vec<f64>> = Vec::new();
        let mut target_reps = Vec::new();
        for (t, pts) in data.domains().iter().enumerate() {
            let mut sum = vec![0.0; self.shared.1.len()];
            for p in pts {
                let x = rows(&p.x);
                let (shared_rep, domain_rep, attr_rep) = self.encode(&x, t);
                if let Some(c) = p.label {
                    let h = self.scores(&x, t);
                    let e: f64 = h.iter().enumerate().map(|(k, v)| (v - if k == c { 1.0 } else { 0.0 }).powi(2)).sum();
                    if t == target {
                        tgt += e;
                    } else {
                        aux += e;
                    }
                }
                for k in 0..attr_rep.len() {
                    let emb: f64 = (0..p.attrs.len()).map(|i| self.attr_map[i][k] * f64::from(p.attrs[i])).sum();
                    attr += (attr_rep[k] - emb).powi(2);
                }
                for k in 0..sum.len() {
                    sum[k] += shared_rep[k];
                }
                if t == target {
                    target_reps.push([shared_rep, domain_rep, attr_rep].concat());
                }
            }
            if !pts.is_empty() {
                means.push(sum.iter().map(|v| v / pts.len() as f64).collect());
            }
        }
        let mut matching = 0.0;
        for a in 0..means.len() {
            for b in a + 1..means.len() {
                matching += means[a].iter().zip(&means[b]).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
            }
        }
        let mut smooth = 0.0;
        for i in 0..target_reps.len() {
            for j in 0..target_reps.len() {
                if graph[i][j] {
                    smooth += target_reps[i].iter().zip(&target_reps[j]).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
                }
            }
        }
        [aux, tgt, attr, matching, smooth]
    }
}

pub struct Instance {
    pub params: ModelParams,
    pub data: TrainingSet,
    pub graph: NeighborGraph,
    pub dense: Vec<Vec<bool>>,
    pub weights: LossWeights,
}

pub fn random_instance(rng: &mut Rng) -> Instance {
    let domains = rng.range_inclusive(2, 3);
    let d = rng.range_inclusive(1, 3);
    let attrs = rng.range_inclusive(1, 4);
    let classes = rng.range_inclusive(1, 3);
    let width = rng.range_inclusive(1, 3);
    let dims = Dims {
        input_dim: d,
        attrs,
        classes,
        shared_filters: rng.range_inclusive(1, 3),
        attr_filters: rng.range_inclusive(1, 3),
        domain_filters: (0..domains).map(|_| rng.range_inclusive(1, 3)).collect(),
        width,
    };
    let mut pts_by_domain = Vec::new();
    for t in 0..domains {
        let n = rng.range_inclusive(1, 4);
        let mut pts = Vec::new();
        for i in 0..n {
            let len = rng.range_inclusive(1, 4);
            let x = Matrix::from_vec(d, len, (0..d * len).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap();
            let a = (0..attrs).map(|_| u8::from(rng.bernoulli(0.5))).collect();
            let labeled = t + 1 < domains || i == 0 || rng.bernoulli(0.5);
            let label = rng.below(classes);
            pts.push(DataPoint::new(x, a, labeled.then_some(label)));
        }
        pts_by_domain.push(pts);
    }
    let n_target = pts_by_domain[domains - 1].len();
    let data = TrainingSet::new(d, attrs, classes, pts_by_domain).unwrap();
    let mut edges = Vec::new();
    for i in 0..n_target {
        for j in i + 1..n_target {
            if rng.bernoulli(0.5) {
                edges.push((i, j));
            }
        }
    }
    let graph = NeighborGraph::from_edges(n_target, &edges).unwrap();
    let mut dense = vec![vec![false; n_target]; n_target];
    for &(i, j) in &edges {
        dense[i][j] = true;
        dense[j][i] = true;
    }
    let params = ModelParams::init(dims, 1.0, rng).unwrap();
    let weights = LossWeights::new(rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    Instance { params, data, graph, dense, weights }
}

/// Compares the library against the oracles on one random conv block.
pub fn check_conv(rng: &mut Rng) -> Result<(), String> {
    let m = rng.range_inclusive(1, 4);
    let d = rng.range_inclusive(1, 4);
    let w = rng.range_inclusive(1, 4);
    let len = rng.range_inclusive(1, 6);
    let conv = ConvBlock::random(rng, m, d, w, -1.0, 1.0).map_err(|e| e.to_string())?;
    let x = Matrix::from_vec(d, len, (0..d * len).map(|_| rng.uniform(-3.0, 3.0)).collect()).map_err(|e| e.to_string())?;
    let (out, _) = conv.forward(&x).map_err(|e| e.to_string())?;
    let (wt, b) = unpack_conv(&conv);
    let expect = naive_conv(&wt, &b, &x.to_rows());
    if out == expect {
        Ok(())
    } else {
        Err(format!("conv {out:?} vs {expect:?}"))
    }
}

/// Compares every objective term and the total against the single-pass oracle.
pub fn check_objective(inst: &Instance) -> Result<(), String> {
    let expect = Plain::of(&inst.params).terms(&inst.data, &inst.dense);
    let got = objective(&inst.params, &inst.data, &inst.graph, &inst.weights).map_err(|e| e.to_string())?;
    let w = inst.weights;
    let total = expect[0] + expect[1] + w.c1 * expect[2] + w.c2 * expect[3] + w.c3 * expect[4];
    let pairs = [
        ("aux_cls", got.aux_cls, expect[0]),
        ("tgt_cls", got.tgt_cls, expect[1]),
        ("attr_map", got.attr_map, expect[2]),
        ("dom_match", got.dom_match, expect[3]),
        ("neighbor", got.neighbor, expect[4]),
        ("total", got.total, total),
    ];
    for (name, g, e) in pairs {
        if !rel_close(g, e) {
            return Err(format!("{name}: {g} vs {e}"));
        }
    }
    Ok(())
}
