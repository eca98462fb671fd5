//! The full parameter set: three encoder kinds, the attribute map and the
//! linear classification heads.
//!
//! Domains are indexed from zero internally; the last domain is the target.
//! Block names shown to users (`f_1`, `U_2`, …) are one-based.

use std::fmt;

use crate::convnet::{ConvBlock, ForwardTrace};
use crate::error::{Error, Result};
use crate::numeric::{rand_uniform, Matrix, Rng};

/// Shape record for a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims {
    /// Feature dimension `d` of every instance column.
    pub input_dim: usize,
    /// Attribute vector length.
    pub attrs: usize,
    /// Number of classes.
    pub classes: usize,
    /// Filters in the shared (domain-independent) encoder.
    pub shared_filters: usize,
    /// Filters in the attribute-embedding encoder.
    pub attr_filters: usize,
    /// Filters in each domain-specific encoder; its length is the domain count.
    pub domain_filters: Vec<usize>,
    /// Window width shared by every encoder.
    pub width: usize,
}

impl Dims {
    pub fn domains(&self) -> usize {
        self.domain_filters.len()
    }

    pub fn target(&self) -> usize {
        self.domains() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("input_dim", self.input_dim),
            ("attrs", self.attrs),
            ("classes", self.classes),
            ("shared_filters", self.shared_filters),
            ("attr_filters", self.attr_filters),
            ("width", self.width),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("dimension {name} must be positive")));
        }
        if self.domains() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two domains (auxiliary + target), got {}",
                self.domains()
            )));
        }
        if let Some(t) = self.domain_filters.iter().position(|&m| m == 0) {
            return Err(Error::InvalidArgument(format!("domain {} has zero filters", t + 1)));
        }
        Ok(())
    }
}

/// Identifies one parameter block of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockId {
    SharedConv,
    DomainConv(usize),
    AttrConv,
    AttrMap,
    SharedHead,
    DomainHead(usize),
    AttrHead,
}

impl BlockId {
    /// Blocks in the order a block-cyclic sweep visits them.
    pub fn sweep_order(domains: usize) -> Vec<BlockId> {
        let mut order = vec![BlockId::SharedConv];
        order.extend((0..domains).map(BlockId::DomainConv));
        order.extend([BlockId::AttrConv, BlockId::AttrMap, BlockId::SharedHead]);
        order.extend((0..domains).map(BlockId::DomainHead));
        order.push(BlockId::AttrHead);
        order
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockId::SharedConv => write!(f, "shared_conv"),
            BlockId::DomainConv(t) => write!(f, "domain_conv.{}", t + 1),
            BlockId::AttrConv => write!(f, "attr_conv"),
            BlockId::AttrMap => write!(f, "attr_map (theta)"),
            BlockId::SharedHead => write!(f, "shared_head"),
            BlockId::DomainHead(t) => write!(f, "domain_head.{}", t + 1),
            BlockId::AttrHead => write!(f, "attr_head"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub(crate) dims: Dims,
    pub(crate) attr_conv: ConvBlock,
    pub(crate) shared_conv: ConvBlock,
    pub(crate) domain_convs: Vec<ConvBlock>,
    /// `attrs × attr_filters`; the embedding of `a` is `attr_mapᵀ a`.
    pub(crate) attr_map: Matrix,
    pub(crate) shared_head: Matrix,
    pub(crate) attr_head: Matrix,
    pub(crate) domain_heads: Vec<Matrix>,
}

/// Per-branch encoder outputs for one data point.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub shared: Vec<f64>,
    pub domain: Vec<f64>,
    pub attr: Vec<f64>,
    pub domain_index: usize,
}

impl Representation {
    /// Shared, domain-specific and attribute parts stacked in that order.
    pub fn concat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.shared.len() + self.domain.len() + self.attr.len());
        v.extend_from_slice(&self.shared);
        v.extend_from_slice(&self.domain);
        v.extend_from_slice(&self.attr);
        v
    }

    pub fn scaled(&self, alpha: f64) -> Representation {
        let s = |v: &[f64]| v.iter().map(|x| x * alpha).collect();
        Representation {
            shared: s(&self.shared),
            domain: s(&self.domain),
            attr: s(&self.attr),
            domain_index: self.domain_index,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepresentationTraces {
    pub shared: ForwardTrace,
    pub domain: ForwardTrace,
    pub attr: ForwardTrace,
}

/// `mapᵀ a`: the sum of the rows of `map` selected by the ones of `a`.
pub fn embed_attributes(map: &Matrix, attrs: &[u8]) -> Result<Vec<f64>> {
    if attrs.len() != map.rows() {
        return Err(Error::shape(
            "embed_attributes",
            format!("attribute vector of length {} against {} map rows", attrs.len(), map.rows()),
        ));
    }
    let mut out = vec![0.0; map.cols()];
    for (k, &bit) in attrs.iter().enumerate() {
        match bit {
            0 => {}
            1 => {
                for (o, v) in out.iter_mut().zip(map.row(k)) {
                    *o += v;
                }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "attribute {k} has value {other}, expected 0 or 1"
                )))
            }
        }
    }
    Ok(out)
}

/// Index of the largest score, lowest index on ties.
pub fn predict(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

impl ModelParams {
    /// All parameters drawn uniformly from `[-init_range, init_range)`.
    pub fn init(dims: Dims, init_range: f64, rng: &mut Rng) -> Result<Self> {
        dims.validate()?;
        if !init_range.is_finite() || init_range <= 0.0 {
            return Err(Error::InvalidArgument(format!("init range {init_range} must be positive")));
        }
        let (lo, hi) = (-init_range, init_range);
        let d = dims.input_dim;
        let w = dims.width;
        let attr_conv = ConvBlock::random(rng, dims.attr_filters, d, w, lo, hi)?;
        let shared_conv = ConvBlock::random(rng, dims.shared_filters, d, w, lo, hi)?;
        let domain_convs = dims
            .domain_filters
            .iter()
            .map(|&m| ConvBlock::random(rng, m, d, w, lo, hi))
            .collect::<Result<Vec<_>>>()?;
        let attr_map = rand_uniform(rng, dims.attrs, dims.attr_filters, lo, hi)?;
        let shared_head = rand_uniform(rng, dims.shared_filters, dims.classes, lo, hi)?;
        let attr_head = rand_uniform(rng, dims.attr_filters, dims.classes, lo, hi)?;
        let domain_heads = dims
            .domain_filters
            .iter()
            .map(|&m| rand_uniform(rng, m, dims.classes, lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelParams {
            dims,
            attr_conv,
            shared_conv,
            domain_convs,
            attr_map,
            shared_head,
            attr_head,
            domain_heads,
        })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        dims.validate()?;
        let d = dims.input_dim;
        let w = dims.width;
        Ok(ModelParams {
            attr_conv: ConvBlock::zeros(dims.attr_filters, d, w)?,
            shared_conv: ConvBlock::zeros(dims.shared_filters, d, w)?,
            domain_convs: dims
                .domain_filters
                .iter()
                .map(|&m| ConvBlock::zeros(m, d, w))
                .collect::<Result<Vec<_>>>()?,
            attr_map: Matrix::zeros(dims.attrs, dims.attr_filters),
            shared_head: Matrix::zeros(dims.shared_filters, dims.classes),
            attr_head: Matrix::zeros(dims.attr_filters, dims.classes),
            domain_heads: dims.domain_filters.iter().map(|&m| Matrix::zeros(m, dims.classes)).collect(),
            dims,
        })
    }

    /// Assembles a model from explicit parts, checking every shape.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        dims: Dims,
        attr_conv: ConvBlock,
        shared_conv: ConvBlock,
        domain_convs: Vec<ConvBlock>,
        attr_map: Matrix,
        shared_head: Matrix,
        attr_head: Matrix,
        domain_heads: Vec<Matrix>,
    ) -> Result<Self> {
        let params = ModelParams {
            dims,
            attr_conv,
            shared_conv,
            domain_convs,
            attr_map,
            shared_head,
            attr_head,
            domain_heads,
        };
        params.check_shapes()?;
        Ok(params)
    }

    fn check_shapes(&self) -> Result<()> {
        let dims = &self.dims;
        dims.validate()?;
        let conv_ok = |c: &ConvBlock, m: usize| {
            c.filters() == m && c.in_dim() == dims.input_dim && c.width() == dims.width
        };
        let mut bad = Vec::new();
        if !conv_ok(&self.attr_conv, dims.attr_filters) {
            bad.push(BlockId::AttrConv);
        }
        if !conv_ok(&self.shared_conv, dims.shared_filters) {
            bad.push(BlockId::SharedConv);
        }
        if self.domain_convs.len() != dims.domains() || self.domain_heads.len() != dims.domains() {
            return Err(Error::shape("ModelParams", "per-domain block count differs from dims"));
        }
        for (t, c) in self.domain_convs.iter().enumerate() {
            if !conv_ok(c, dims.domain_filters[t]) {
                bad.push(BlockId::DomainConv(t));
            }
        }
        if self.attr_map.shape() != (dims.attrs, dims.attr_filters) {
            bad.push(BlockId::AttrMap);
        }
        if self.shared_head.shape() != (dims.shared_filters, dims.classes) {
            bad.push(BlockId::SharedHead);
        }
        if self.attr_head.shape() != (dims.attr_filters, dims.classes) {
            bad.push(BlockId::AttrHead);
        }
        for (t, h) in self.domain_heads.iter().enumerate() {
            if h.shape() != (dims.domain_filters[t], dims.classes) {
                bad.push(BlockId::DomainHead(t));
            }
        }
        match bad.first() {
            None => Ok(()),
            Some(b) => Err(Error::shape("ModelParams", format!("block {b} does not match dims"))),
        }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn attr_conv(&self) -> &ConvBlock {
        &self.attr_conv
    }

    pub fn shared_conv(&self) -> &ConvBlock {
        &self.shared_conv
    }

    pub fn domain_conv(&self, t: usize) -> &ConvBlock {
        &self.domain_convs[t]
    }

    pub fn attr_map(&self) -> &Matrix {
        &self.attr_map
    }

    pub fn attr_map_mut(&mut self) -> &mut Matrix {
        &mut self.attr_map
    }

    pub fn shared_head(&self) -> &Matrix {
        &self.shared_head
    }

    pub fn attr_head(&self) -> &Matrix {
        &self.attr_head
    }

    pub fn domain_head(&self, t: usize) -> &Matrix {
        &self.domain_heads[t]
    }

    /// Flat views of every parameter block in Φ order. Encoders contribute
    /// two slices each (weights, then bias).
    pub fn blocks(&self) -> Vec<(BlockId, &[f64])> {
        let mut out: Vec<(BlockId, &[f64])> = vec![
            (BlockId::AttrConv, self.attr_conv.weights()),
            (BlockId::AttrConv, self.attr_conv.bias()),
            (BlockId::SharedConv, self.shared_conv.weights()),
            (BlockId::SharedConv, self.shared_conv.bias()),
        ];
        for (t, c) in self.domain_convs.iter().enumerate() {
            out.push((BlockId::DomainConv(t), c.weights()));
            out.push((BlockId::DomainConv(t), c.bias()));
        }
        out.push((BlockId::AttrMap, self.attr_map.as_slice()));
        out.push((BlockId::SharedHead, self.shared_head.as_slice()));
        out.push((BlockId::AttrHead, self.attr_head.as_slice()));
        for (t, h) in self.domain_heads.iter().enumerate() {
            out.push((BlockId::DomainHead(t), h.as_slice()));
        }
        out
    }

    /// Mutable counterpart of [`ModelParams::blocks`], same order.
    pub fn blocks_mut(&mut self) -> Vec<(BlockId, &mut [f64])> {
        let mut out: Vec<(BlockId, &mut [f64])> = Vec::new();
        let (w, b) = self.attr_conv.parts_mut();
        out.push((BlockId::AttrConv, w));
        out.push((BlockId::AttrConv, b));
        let (w, b) = self.shared_conv.parts_mut();
        out.push((BlockId::SharedConv, w));
        out.push((BlockId::SharedConv, b));
        for (t, c) in self.domain_convs.iter_mut().enumerate() {
            let (w, b) = c.parts_mut();
            out.push((BlockId::DomainConv(t), w));
            out.push((BlockId::DomainConv(t), b));
        }
        out.push((BlockId::AttrMap, self.attr_map.as_mut_slice()));
        out.push((BlockId::SharedHead, self.shared_head.as_mut_slice()));
        out.push((BlockId::AttrHead, self.attr_head.as_mut_slice()));
        for (t, h) in self.domain_heads.iter_mut().enumerate() {
            out.push((BlockId::DomainHead(t), h.as_mut_slice()));
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.blocks().iter().map(|(_, s)| s.len()).sum()
    }

    /// Encodes `x` with the shared, domain-`t` and attribute encoders.
    pub fn represent(&self, x: &Matrix, t: usize) -> Result<(Representation, RepresentationTraces)> {
        if t >= self.dims.domains() {
            return Err(Error::InvalidArgument(format!(
                "domain index {t} out of range for {} domains",
                self.dims.domains()
            )));
        }
        let (shared, shared_trace) = self.shared_conv.forward(x)?;
        let (domain, domain_trace) = self.domain_convs[t].forward(x)?;
        let (attr, attr_trace) = self.attr_conv.forward(x)?;
        Ok((
            Representation { shared, domain, attr, domain_index: t },
            RepresentationTraces { shared: shared_trace, domain: domain_trace, attr: attr_trace },
        ))
    }

    /// Class scores: each head applied to its encoding, summed. No bias term.
    pub fn classify(&self, rep: &Representation) -> Result<Vec<f64>> {
        let t = rep.domain_index;
        if t >= self.dims.domains() {
            return Err(Error::InvalidArgument(format!("domain index {t} out of range")));
        }
        let mut scores = self.shared_head.tr_matvec(&rep.shared)?;
        let domain = self.domain_heads[t].tr_matvec(&rep.domain)?;
        let attr = self.attr_head.tr_matvec(&rep.attr)?;
        for ((s, a), b) in scores.iter_mut().zip(&domain).zip(&attr) {
            *s += a + b;
        }
        Ok(scores)
    }

    /// Predicted class for `x` treated as a point of domain `t`.
    pub fn predict_point(&self, x: &Matrix, t: usize) -> Result<usize> {
        let (rep, _) = self.represent(x, t)?;
        Ok(predict(&self.classify(&rep)?))
    }
}
