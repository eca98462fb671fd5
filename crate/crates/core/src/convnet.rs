//! Single-stage convolutional encoder: a bank of `m` filters of width `w`
//! slid over the columns of a `d × L` input, ReLU, then a max over all
//! window positions. The output length is always `m`, independent of `L`.

use crate::error::{Error, Result};
use crate::numeric::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvBlock {
    filters: usize,
    in_dim: usize,
    width: usize,
    /// `filters × in_dim × width`, index `(j * in_dim + r) * width + k`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

/// What the backward pass needs from a forward evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `filters × positions` pre-activations (convolution plus bias).
    pub pre_activation: Matrix,
    /// Winning window position per filter, lowest index on ties.
    pub argmax: Vec<usize>,
    /// The input after right-padding to at least `width` columns.
    pub input: Matrix,
    /// Column count before padding.
    pub input_len: usize,
}

impl ForwardTrace {
    /// Pooled output recomputed from the stored pre-activations.
    pub fn output(&self) -> Vec<f64> {
        self.argmax
            .iter()
            .enumerate()
            .map(|(j, &p)| self.pre_activation[(j, p)].max(0.0))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Gradient w.r.t. the unpadded input.
    pub input: Matrix,
}

impl ConvBlock {
    pub fn zeros(filters: usize, in_dim: usize, width: usize) -> Result<Self> {
        if filters == 0 || in_dim == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "conv block needs positive dims, got m={filters} d={in_dim} w={width}"
            )));
        }
        Ok(ConvBlock {
            filters,
            in_dim,
            width,
            weights: vec![0.0; filters * in_dim * width],
            bias: vec![0.0; filters],
        })
    }

    pub fn from_parts(
        filters: usize,
        in_dim: usize,
        width: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        let mut block = ConvBlock::zeros(filters, in_dim, width)?;
        if weights.len() != block.weights.len() || bias.len() != filters {
            return Err(Error::shape(
                "ConvBlock::from_parts",
                format!(
                    "expected {} weights and {} biases, got {} and {}",
                    block.weights.len(),
                    filters,
                    weights.len(),
                    bias.len()
                ),
            ));
        }
        block.weights = weights;
        block.bias = bias;
        Ok(block)
    }

    /// Uniform initialisation of every weight and bias in `[lo, hi)`.
    pub fn random(
        rng: &mut Rng,
        filters: usize,
        in_dim: usize,
        width: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!("uniform range [{lo}, {hi}) is empty")));
        }
        let mut block = ConvBlock::zeros(filters, in_dim, width)?;
        for v in block.weights.iter_mut().chain(block.bias.iter_mut()) {
            *v = rng.uniform(lo, hi);
        }
        Ok(block)
    }

    pub fn filters(&self) -> usize {
        self.filters
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.bias)
    }

    pub fn weight(&self, filter: usize, row: usize, offset: usize) -> f64 {
        self.weights[(filter * self.in_dim + row) * self.width + offset]
    }

    /// Number of window positions for an input with `len` columns.
    pub fn positions(&self, len: usize) -> usize {
        len.max(self.width) - self.width + 1
    }

    fn pad(&self, x: &Matrix) -> Matrix {
        if x.cols() >= self.width {
            return x.clone();
        }
        let mut padded = Matrix::zeros(x.rows(), self.width);
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                padded[(r, c)] = x[(r, c)];
            }
        }
        padded
    }

    /// Convolution, ReLU and global max-pool. Returns the pooled vector and
    /// the trace needed by [`ConvBlock::backward`].
    pub fn forward(&self, x: &Matrix) -> Result<(Vec<f64>, ForwardTrace)> {
        if x.rows() != self.in_dim {
            return Err(Error::shape(
                "conv_forward",
                format!("input has {} rows, block expects {}", x.rows(), self.in_dim),
            ));
        }
        if x.cols() == 0 {
            return Err(Error::InvalidArgument("conv input has no columns".into()));
        }
        let input = self.pad(x);
        let positions = self.positions(input.cols());
        let mut pre = Matrix::zeros(self.filters, positions);
        let mut argmax = vec![0; self.filters];
        let mut out = vec![0.0; self.filters];
        for j in 0..self.filters {
            let mut best = f64::NEG_INFINITY;
            for p in 0..positions {
                let mut s = self.bias[j];
                for r in 0..self.in_dim {
                    let w = &self.weights[(j * self.in_dim + r) * self.width..][..self.width];
                    let xr = &input.row(r)[p..p + self.width];
                    for (wk, xk) in w.iter().zip(xr) {
                        s += wk * xk;
                    }
                }
                pre[(j, p)] = s;
                if s > best {
                    best = s;
                    argmax[j] = p;
                }
            }
            out[j] = best.max(0.0);
        }
        let trace = ForwardTrace { pre_activation: pre, argmax, input, input_len: x.cols() };
        Ok((out, trace))
    }

    /// Sub-gradient of `upstream · forward(x)` with respect to weights, bias
    /// and input. Only each filter's winning position carries gradient, and
    /// a pooled pre-activation `<= 0` contributes nothing.
    pub fn backward(&self, trace: &ForwardTrace, upstream: &[f64]) -> Result<ConvGradient> {
        let mut weights = vec![0.0; self.weights.len()];
        let mut bias = vec![0.0; self.filters];
        let mut input = Matrix::zeros(self.in_dim, trace.input.cols());
        self.accumulate(trace, upstream, &mut weights, &mut bias, Some(&mut input))?;
        let mut unpadded = Matrix::zeros(self.in_dim, trace.input_len);
        for r in 0..self.in_dim {
            for c in 0..trace.input_len {
                unpadded[(r, c)] = input[(r, c)];
            }
        }
        Ok(ConvGradient { weights, bias, input: unpadded })
    }

    /// Adds the parameter sub-gradient into caller-owned buffers, optionally
    /// also the (padded) input gradient.
    pub(crate) fn accumulate(
        &self,
        trace: &ForwardTrace,
        upstream: &[f64],
        d_weights: &mut [f64],
        d_bias: &mut [f64],
        mut d_input: Option<&mut Matrix>,
    ) -> Result<()> {
        if upstream.len() != self.filters {
            return Err(Error::shape(
                "conv_backward",
                format!("upstream has length {}, block has {} filters", upstream.len(), self.filters),
            ));
        }
        if trace.argmax.len() != self.filters || trace.input.rows() != self.in_dim {
            return Err(Error::shape("conv_backward", "trace was not produced by this block"));
        }
        for (j, &g) in upstream.iter().enumerate() {
            let p = trace.argmax[j];
            if g == 0.0 || trace.pre_activation[(j, p)] <= 0.0 {
                continue;
            }
            d_bias[j] += g;
            for r in 0..self.in_dim {
                let base = (j * self.in_dim + r) * self.width;
                for k in 0..self.width {
                    d_weights[base + k] += g * trace.input[(r, p + k)];
                    if let Some(dx) = d_input.as_deref_mut() {
                        dx[(r, p + k)] += g * self.weights[base + k];
                    }
                }
            }
        }
        Ok(())
    }
}
