//! Synthetic multi-domain data with class prototypes, per-domain additive
//! shifts and class-conditional binary attributes.

use super::{DataPoint, Domain, MultiDomainDataset};
use crate::error::{Error, Result};
use crate::numeric::{Matrix, Rng};

const SYNTH_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Points per domain; its length is the domain count and the last entry
    /// is the target.
    pub points: Vec<usize>,
    pub input_dim: usize,
    pub attrs: usize,
    pub classes: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Scale of the class prototypes.
    pub margin: f64,
    /// Scale of each domain's additive shift.
    pub shift: f64,
    /// Standard deviation of per-entry Gaussian noise.
    pub noise: f64,
    /// Bernoulli probability for attributes "on" in a class template.
    pub attr_on: f64,
    /// Bernoulli probability for attributes "off" in a class template.
    pub attr_off: f64,
    /// Probability that a point's recorded label is replaced by a uniformly
    /// chosen different class. Inputs and attributes follow the true class.
    pub label_noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            points: vec![60; 3],
            input_dim: 16,
            attrs: 10,
            classes: 3,
            min_len: 3,
            max_len: 8,
            margin: 1.6,
            shift: 0.5,
            noise: 0.03,
            attr_on: 0.8,
            attr_off: 0.2,
            label_noise: 0.23,
        }
    }
}

impl SynthSpec {
    /// The default data with eight classes: the labelled target points then
    /// cover each class thinly, so the auxiliary domains carry real signal.
    pub fn transfer_benchmark() -> Self {
        SynthSpec { classes: 8, ..SynthSpec::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input_dim", self.input_dim),
            ("attrs", self.attrs),
            ("classes", self.classes),
            ("min_len", self.min_len),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("synthetic spec: {name} must be positive")));
        }
        if self.points.len() < 2 {
            return Err(Error::InvalidArgument("synthetic spec: need at least two domains".into()));
        }
        if let Some(t) = self.points.iter().position(|&n| n == 0) {
            return Err(Error::InvalidArgument(format!("synthetic spec: domain {t} has no points")));
        }
        if self.max_len < self.min_len {
            return Err(Error::InvalidArgument("synthetic spec: max_len < min_len".into()));
        }
        for (name, v) in [("margin", self.margin), ("shift", self.shift), ("noise", self.noise)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!("synthetic spec: {name} must be >= 0")));
            }
        }
        for (name, p) in [("attr_on", self.attr_on), ("attr_off", self.attr_off), ("label_noise", self.label_noise)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("synthetic spec: {name} must be in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Draws a dataset from `spec`; identical `(spec, seed)` give identical data.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<MultiDomainDataset> {
    spec.validate()?;
    let mut rng = Rng::with_stream(seed, SYNTH_STREAM);
    let d = spec.input_dim;

    let prototypes: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| (0..d).map(|_| spec.margin * rng.normal()).collect())
        .collect();
    let templates: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| {
            (0..spec.attrs)
                .map(|_| if rng.bernoulli(0.5) { spec.attr_on } else { spec.attr_off })
                .collect()
        })
        .collect();
    let shifts: Vec<Vec<f64>> = spec
        .points
        .iter()
        .map(|_| (0..d).map(|_| spec.shift * rng.normal()).collect())
        .collect();

    let target = spec.points.len() - 1;
    let mut domains = Vec::with_capacity(spec.points.len());
    for (t, &n) in spec.points.iter().enumerate() {
        let mut labels: Vec<usize> = (0..n).map(|i| i % spec.classes).collect();
        rng.shuffle(&mut labels);
        let mut points = Vec::with_capacity(n);
        for &c in &labels {
            let len = rng.range_inclusive(spec.min_len, spec.max_len);
            let mut x = Matrix::zeros(d, len);
            for col in 0..len {
                for r in 0..d {
                    x[(r, col)] = prototypes[c][r] + shifts[t][r] + spec.noise * rng.normal();
                }
            }
            let attrs = templates[c].iter().map(|&p| u8::from(rng.bernoulli(p))).collect();
            let label = if spec.label_noise > 0.0 && spec.classes > 1 && rng.bernoulli(spec.label_noise) {
                (c + 1 + rng.below(spec.classes - 1)) % spec.classes
            } else {
                c
            };
            points.push(DataPoint::new(x, attrs, Some(label)));
        }
        let id = if t == target { "target".to_string() } else { format!("aux{}", t + 1) };
        domains.push(Domain { id, points });
    }
    MultiDomainDataset::new(d, spec.attrs, spec.classes, domains)
}
