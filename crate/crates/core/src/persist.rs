//! JSON model files.
//!
//! A model document carries a format version, the [`Dims`] record and one
//! entry per tensor with its shape and row-major values:
//!
//! ```json
//! {
//!   "version": 1,
//!   "dims": {"input_dim": 2, "attrs": 3, "classes": 2, "shared_filters": 1,
//!            "attr_filters": 1, "domain_filters": [1, 1], "width": 2},
//!   "tensors": {
//!     "attr_map": {"shape": [3, 1], "data": [0.1, -0.2, 0.05]},
//!     "shared_conv.weight": {"shape": [1, 2, 2], "data": [0.0, 0.1, 0.2, 0.3]},
//!     ...
//!   }
//! }
//! ```
//!
//! Conv weights are indexed `[filter, row, offset]`, heads `[filters, classes]`
//! and per-domain tensors are numbered from 1. Floats are written in shortest
//! round-trip form, so loading a saved model reproduces it bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convnet::ConvBlock;
use crate::error::{Error, Result};
use crate::model::{Dims, ModelParams};
use crate::numeric::Matrix;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsRecord {
    input_dim: usize,
    attrs: usize,
    classes: usize,
    shared_filters: usize,
    attr_filters: usize,
    domain_filters: Vec<usize>,
    width: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    version: u32,
    dims: DimsRecord,
    tensors: BTreeMap<String, Tensor>,
}

fn conv_names(prefix: &str) -> (String, String) {
    (format!("{prefix}.weight"), format!("{prefix}.bias"))
}

fn domain_conv_prefix(t: usize) -> String {
    format!("domain_conv.{}", t + 1)
}

fn domain_head_name(t: usize) -> String {
    format!("domain_head.{}", t + 1)
}

fn put_conv(tensors: &mut BTreeMap<String, Tensor>, prefix: &str, conv: &ConvBlock) {
    let (w, b) = conv_names(prefix);
    tensors.insert(
        w,
        Tensor { shape: vec![conv.filters(), conv.in_dim(), conv.width()], data: conv.weights().to_vec() },
    );
    tensors.insert(b, Tensor { shape: vec![conv.filters()], data: conv.bias().to_vec() });
}

fn put_matrix(tensors: &mut BTreeMap<String, Tensor>, name: String, m: &Matrix) {
    tensors.insert(name, Tensor { shape: vec![m.rows(), m.cols()], data: m.as_slice().to_vec() });
}

/// Serializes `params` to a model document.
pub fn model_to_json(params: &ModelParams) -> Result<String> {
    let dims = params.dims();
    let mut tensors = BTreeMap::new();
    put_conv(&mut tensors, "attr_conv", params.attr_conv());
    put_conv(&mut tensors, "shared_conv", params.shared_conv());
    for t in 0..dims.domains() {
        put_conv(&mut tensors, &domain_conv_prefix(t), params.domain_conv(t));
        put_matrix(&mut tensors, domain_head_name(t), params.domain_head(t));
    }
    put_matrix(&mut tensors, "attr_map".into(), params.attr_map());
    put_matrix(&mut tensors, "shared_head".into(), params.shared_head());
    put_matrix(&mut tensors, "attr_head".into(), params.attr_head());

    if let Some((name, _)) = tensors.iter().find(|(_, t)| t.data.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument(format!("tensor {name} has non-finite entries")));
    }
    let doc = ModelDocument {
        version: MODEL_VERSION,
        dims: DimsRecord {
            input_dim: dims.input_dim,
            attrs: dims.attrs,
            classes: dims.classes,
            shared_filters: dims.shared_filters,
            attr_filters: dims.attr_filters,
            domain_filters: dims.domain_filters.clone(),
            width: dims.width,
        },
        tensors,
    };
    Ok(serde_json::to_string(&doc).expect("model serialization cannot fail"))
}

struct TensorTable {
    tensors: BTreeMap<String, Tensor>,
}

impl TensorTable {
    fn take(&mut self, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
        let loc = format!("tensors.{name}");
        let t = self.tensors.remove(name).ok_or_else(|| Error::data(&loc, "missing tensor"))?;
        if t.shape != shape {
            return Err(Error::data(&loc, format!("shape {:?}, expected {:?}", t.shape, shape)));
        }
        let expected: usize = shape.iter().product();
        if t.data.len() != expected {
            return Err(Error::data(&loc, format!("{} values for shape {:?}", t.data.len(), shape)));
        }
        Ok(t.data)
    }

    fn conv(&mut self, prefix: &str, filters: usize, dims: &Dims) -> Result<ConvBlock> {
        let (w, b) = conv_names(prefix);
        let weights = self.take(&w, &[filters, dims.input_dim, dims.width])?;
        let bias = self.take(&b, &[filters])?;
        ConvBlock::from_parts(filters, dims.input_dim, dims.width, weights, bias)
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<Matrix> {
        let data = self.take(name, &[rows, cols])?;
        Matrix::from_vec(rows, cols, data).map_err(|e| Error::data(format!("tensors.{name}"), e.to_string()))
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<ModelParams> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::data("document", e.to_string()))?;
    if doc.version != MODEL_VERSION {
        return Err(Error::data("version", format!("unsupported model version {}", doc.version)));
    }
    let r = doc.dims;
    let dims = Dims {
        input_dim: r.input_dim,
        attrs: r.attrs,
        classes: r.classes,
        shared_filters: r.shared_filters,
        attr_filters: r.attr_filters,
        domain_filters: r.domain_filters,
        width: r.width,
    };
    dims.validate().map_err(|e| Error::data("dims", e.to_string()))?;

    let mut table = TensorTable { tensors: doc.tensors };
    let attr_conv = table.conv("attr_conv", dims.attr_filters, &dims)?;
    let shared_conv = table.conv("shared_conv", dims.shared_filters, &dims)?;
    let mut domain_convs = Vec::with_capacity(dims.domains());
    let mut domain_heads = Vec::with_capacity(dims.domains());
    for (t, &m) in dims.domain_filters.iter().enumerate() {
        domain_convs.push(table.conv(&domain_conv_prefix(t), m, &dims)?);
        domain_heads.push(table.matrix(&domain_head_name(t), m, dims.classes)?);
    }
    let attr_map = table.matrix("attr_map", dims.attrs, dims.attr_filters)?;
    let shared_head = table.matrix("shared_head", dims.shared_filters, dims.classes)?;
    let attr_head = table.matrix("attr_head", dims.attr_filters, dims.classes)?;
    if let Some(name) = table.tensors.keys().next() {
        return Err(Error::data(format!("tensors.{name}"), "unexpected tensor"));
    }
    ModelParams::from_parts(dims, attr_conv, shared_conv, domain_convs, attr_map, shared_head, attr_head, domain_heads)
}

pub fn save_model(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = model_to_json(params)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
