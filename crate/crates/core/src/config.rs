//! Flat `key = value` run configuration.
//!
//! ```text
//! # experiment 3
//! seed = 7
//! tau = 5e-4
//! domain_filters = 4,4,8
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and repeated
//! keys are errors. Values set later through [`RunConfig::set`] (command-line
//! flags) replace file values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::SynthSpec;
use crate::error::{Error, Result};
use crate::gradcheck::GradCheckSpec;
use crate::objective::LossWeights;
use crate::trainer::{Architecture, TrainConfig};

/// Every key a config file may contain, with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "seed for data generation, splitting and initialisation"),
    ("workers", "worker threads for per-point computation"),
    ("data", "dataset file read by train and eval"),
    ("model", "model file read by eval"),
    ("out", "output file (synth, eval) or directory (train)"),
    ("model_out", "model file written by train (default <out>/model.json)"),
    ("curve_out", "curve CSV written by train (default <out>/curve.csv)"),
    ("report_out", "report written by train (default <out>/report.json)"),
    ("c1", "weight of the attribute-map term"),
    ("c2", "weight of the domain-matching term"),
    ("c3", "weight of the neighbour-smoothness term"),
    ("tau", "descent step"),
    ("max_iters", "iteration budget"),
    ("update_mode", "joint or block-cyclic"),
    ("tolerance", "early-stop threshold on the relative change of the total"),
    ("knn_k", "neighbours per target point"),
    ("shared_filters", "filters in the shared encoder"),
    ("attr_filters", "filters in the attribute encoder"),
    ("domain_filters", "filters per domain encoder: one value or a comma list"),
    ("width", "convolution window width"),
    ("init_range", "half-width of the uniform initialisation interval"),
    ("points", "synth: comma list of points per domain, target last"),
    ("input_dim", "synth: instance feature dimension"),
    ("attrs", "synth: attribute count"),
    ("classes", "synth: class count"),
    ("min_len", "synth: fewest instances per point"),
    ("max_len", "synth: most instances per point"),
    ("margin", "synth: class prototype scale"),
    ("shift", "synth: per-domain shift scale"),
    ("noise", "synth: per-entry noise standard deviation"),
    ("attr_on", "synth: probability of an attribute the class usually has"),
    ("attr_off", "synth: probability of an attribute the class usually lacks"),
    ("label_noise", "synth: probability of recording a wrong label"),
    ("gradcheck_instances", "gradcheck: random instances to check"),
    ("gradcheck_eps", "gradcheck: finite-difference step"),
    ("gradcheck_tolerance", "gradcheck: largest accepted relative error"),
];

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        RunConfig::default()
    }

    /// Parses config text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = RunConfig::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{origin}:{}: expected key = value", n + 1)))?;
            let key = key.trim();
            if !is_known(key) {
                return Err(Error::Config(format!("{origin}:{}: unknown key '{key}'", n + 1)));
            }
            if cfg.values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("{origin}:{}: key '{key}' set twice", n + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text, &path.display().to_string())
    }

    /// Sets or replaces one value.
    pub fn set(&mut self, key: &str, value: impl Display) -> Result<()> {
        if !is_known(key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{pair}' is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("key '{key}': cannot parse '{v}': {e}"))))
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.require::<String>(key).map(PathBuf::from)
    }

    fn get_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Config(format!("key '{key}': cannot parse '{v}': {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn seed(&self) -> Result<u64> {
        self.get_or("seed", 0)
    }

    pub fn workers(&self) -> Result<usize> {
        let w = self.get_or("workers", 1)?;
        if w == 0 {
            return Err(Error::Config("key 'workers' must be at least 1".into()));
        }
        Ok(w)
    }

    /// Training settings: library defaults overridden by any keys present.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let arch = Architecture {
            shared_filters: self.get_or("shared_filters", d.arch.shared_filters)?,
            attr_filters: self.get_or("attr_filters", d.arch.attr_filters)?,
            domain_filters: self.get_list("domain_filters")?.unwrap_or(d.arch.domain_filters),
            width: self.get_or("width", d.arch.width)?,
        };
        let cfg = TrainConfig {
            weights: LossWeights::new(
                self.get_or("c1", d.weights.c1)?,
                self.get_or("c2", d.weights.c2)?,
                self.get_or("c3", d.weights.c3)?,
            ),
            tau: self.get_or("tau", d.tau)?,
            max_iters: self.get_or("max_iters", d.max_iters)?,
            update_mode: self.get_or("update_mode", d.update_mode)?,
            tolerance: self.get_or("tolerance", d.tolerance)?,
            knn_k: self.get_or("knn_k", d.knn_k)?,
            arch,
            init_range: self.get_or("init_range", d.init_range)?,
            seed: self.seed()?,
            workers: self.workers()?,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Synthetic-data settings: library defaults overridden by any keys present.
    pub fn synth_spec(&self) -> Result<SynthSpec> {
        let d = SynthSpec::default();
        let spec = SynthSpec {
            points: self.get_list("points")?.unwrap_or(d.points),
            input_dim: self.get_or("input_dim", d.input_dim)?,
            attrs: self.get_or("attrs", d.attrs)?,
            classes: self.get_or("classes", d.classes)?,
            min_len: self.get_or("min_len", d.min_len)?,
            max_len: self.get_or("max_len", d.max_len)?,
            margin: self.get_or("margin", d.margin)?,
            shift: self.get_or("shift", d.shift)?,
            noise: self.get_or("noise", d.noise)?,
            attr_on: self.get_or("attr_on", d.attr_on)?,
            attr_off: self.get_or("attr_off", d.attr_off)?,
            label_noise: self.get_or("label_noise", d.label_noise)?,
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn gradcheck_spec(&self) -> Result<GradCheckSpec> {
        let d = GradCheckSpec::default();
        Ok(GradCheckSpec {
            eps: self.get_or("gradcheck_eps", d.eps)?,
            tolerance: self.get_or("gradcheck_tolerance", d.tolerance)?,
            ..d
        })
    }

    pub fn gradcheck_instances(&self) -> Result<usize> {
        self.get_or("gradcheck_instances", 5)
    }
}
