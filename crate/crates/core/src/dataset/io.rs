//! JSON dataset files.
//!
//! ```json
//! {
//!   "version": 1, "d": 2, "A": 3, "Y": 2,
//!   "domains": [
//!     {"id": "aux1", "target": false, "points": [
//!       {"x": [[0.5, 1.0], [0.0, -1.0]], "a": [0, 1, 1], "y": [1, 0]}
//!     ]},
//!     {"id": "target", "target": true, "points": [
//!       {"x": [[1.5], [2.0]], "a": [1, 0, 0], "y": [0, 1], "role": "test"}
//!     ]}
//!   ]
//! }
//! ```
//!
//! `x` is the `d × L` instance matrix as a list of rows. Exactly one domain is
//! the target; it is moved to the last position on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{point_location, DataPoint, Domain, MultiDomainDataset, Role};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    version: u32,
    d: usize,
    #[serde(rename = "A")]
    attrs: usize,
    #[serde(rename = "Y")]
    classes: usize,
    domains: Vec<RawDomain>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    id: String,
    target: bool,
    points: Vec<RawPoint>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    x: Vec<Vec<f64>>,
    a: Vec<f64>,
    y: Option<Vec<f64>>,
    #[serde(default)]
    role: Option<Role>,
}

#[derive(Serialize)]
struct OutDataset<'a> {
    version: u32,
    d: usize,
    #[serde(rename = "A")]
    attrs: usize,
    #[serde(rename = "Y")]
    classes: usize,
    domains: Vec<OutDomain<'a>>,
}

#[derive(Serialize)]
struct OutDomain<'a> {
    id: &'a str,
    target: bool,
    points: Vec<OutPoint<'a>>,
}

#[derive(Serialize)]
struct OutPoint<'a> {
    x: Vec<Vec<f64>>,
    a: &'a [u8],
    y: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    role: Option<Role>,
}

fn convert_point(raw: RawPoint, d: usize, classes: usize, loc: &str) -> Result<DataPoint> {
    if raw.x.len() != d {
        return Err(Error::data(loc, format!("x has {} rows, expected d = {d}", raw.x.len())));
    }
    let x = Matrix::from_rows(&raw.x).map_err(|e| Error::data(loc, format!("x: {e}")))?;
    let attrs = raw
        .a
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if v == 0.0 {
                Ok(0u8)
            } else if v == 1.0 {
                Ok(1u8)
            } else {
                Err(Error::data(loc, format!("non-binary attribute a[{k}] = {v}")))
            }
        })
        .collect::<Result<Vec<u8>>>()?;
    let label = match raw.y {
        None => None,
        Some(y) => {
            if y.len() != classes {
                return Err(Error::data(loc, format!("y has length {}, expected Y = {classes}", y.len())));
            }
            let ones: Vec<usize> = (0..y.len()).filter(|&c| y[c] == 1.0).collect();
            let zeros = y.iter().filter(|&&v| v == 0.0).count();
            if ones.len() != 1 || zeros != classes - 1 {
                return Err(Error::data(loc, format!("y = {y:?} is not one-hot")));
            }
            Some(ones[0])
        }
    };
    Ok(DataPoint { x, attrs, label, role: raw.role })
}

/// Parses and validates a dataset document.
pub fn parse_dataset(text: &str) -> Result<MultiDomainDataset> {
    let raw: RawDataset =
        serde_json::from_str(text).map_err(|e| Error::data("document", e.to_string()))?;
    if raw.version != DATASET_VERSION {
        return Err(Error::data("version", format!("unsupported version {}", raw.version)));
    }
    let targets: Vec<usize> = (0..raw.domains.len()).filter(|&t| raw.domains[t].target).collect();
    if targets.len() != 1 {
        return Err(Error::data(
            "domains",
            format!("exactly one domain must have target: true, found {}", targets.len()),
        ));
    }
    let target_pos = targets[0];
    let mut domains = Vec::with_capacity(raw.domains.len());
    let mut target = None;
    for (t, dom) in raw.domains.into_iter().enumerate() {
        let points = dom
            .points
            .into_iter()
            .enumerate()
            .map(|(i, p)| convert_point(p, raw.d, raw.classes, &point_location(&dom.id, t, i)))
            .collect::<Result<Vec<_>>>()?;
        let domain = Domain { id: dom.id, points };
        if t == target_pos {
            target = Some(domain);
        } else {
            domains.push(domain);
        }
    }
    domains.extend(target);
    MultiDomainDataset::new(raw.d, raw.attrs, raw.classes, domains)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<MultiDomainDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text)
}

pub fn to_json_string(dataset: &MultiDomainDataset) -> String {
    let target = dataset.target_index();
    let doc = OutDataset {
        version: DATASET_VERSION,
        d: dataset.input_dim(),
        attrs: dataset.attrs(),
        classes: dataset.classes(),
        domains: dataset
            .domains()
            .iter()
            .enumerate()
            .map(|(t, dom)| OutDomain {
                id: &dom.id,
                target: t == target,
                points: dom
                    .points
                    .iter()
                    .map(|p| OutPoint {
                        x: p.x.to_rows(),
                        a: &p.attrs,
                        y: p.label.map(|c| {
                            let mut y = vec![0u8; dataset.classes()];
                            y[c] = 1;
                            y
                        }),
                        role: p.role,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("dataset serialization cannot fail")
}

pub fn save_dataset(dataset: &MultiDomainDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json_string(dataset);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
