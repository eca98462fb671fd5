//! Multi-domain data: points, domains, target-domain roles and the training
//! view the objective consumes.

mod graph;
mod io;
mod split;
mod synth;

pub use graph::{build_neighbor_graph, NeighborGraph};
pub use io::{load_dataset, parse_dataset, save_dataset, to_json_string};
pub use split::{split_target, SplitCounts};
pub use synth::{generate_synthetic, SynthSpec};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Role of a target-domain point under the train/test protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    TrainLabeled,
    TrainUnlabeled,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::TrainLabeled => "train-labeled",
            Role::TrainUnlabeled => "train-unlabeled",
            Role::Test => "test",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train-labeled" => Ok(Role::TrainLabeled),
            "train-unlabeled" => Ok(Role::TrainUnlabeled),
            "test" => Ok(Role::Test),
            other => Err(Error::InvalidArgument(format!("unknown role '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    /// `d × L` instance matrix; each column is one instance.
    pub x: Matrix,
    /// Binary attribute vector.
    pub attrs: Vec<u8>,
    /// Class index of the one-hot label, if labelled.
    pub label: Option<usize>,
    pub role: Option<Role>,
}

impl DataPoint {
    pub fn new(x: Matrix, attrs: Vec<u8>, label: Option<usize>) -> Self {
        DataPoint { x, attrs, label, role: None }
    }

    /// One-hot encoding of the label over `classes` classes.
    pub fn one_hot(&self, classes: usize) -> Option<Vec<f64>> {
        self.label.map(|c| {
            let mut y = vec![0.0; classes];
            y[c] = 1.0;
            y
        })
    }

    fn validate(&self, input_dim: usize, attrs: usize, classes: usize, loc: &str) -> Result<()> {
        if self.x.rows() != input_dim {
            return Err(Error::data(loc, format!("x has {} rows, expected d = {input_dim}", self.x.rows())));
        }
        if self.x.cols() == 0 {
            return Err(Error::data(loc, "x has no instance columns"));
        }
        if self.attrs.len() != attrs {
            return Err(Error::data(loc, format!("a has length {}, expected A = {attrs}", self.attrs.len())));
        }
        if let Some(k) = self.attrs.iter().position(|&v| v > 1) {
            return Err(Error::data(loc, format!("attribute {k} is {}, expected 0 or 1", self.attrs[k])));
        }
        if let Some(c) = self.label {
            if c >= classes {
                return Err(Error::data(loc, format!("label {c} out of range for Y = {classes}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub id: String,
    pub points: Vec<DataPoint>,
}

/// `T` domains sharing `d`, `A` and `Y`. The last domain is the target.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiDomainDataset {
    input_dim: usize,
    attrs: usize,
    classes: usize,
    domains: Vec<Domain>,
}

impl MultiDomainDataset {
    pub fn new(input_dim: usize, attrs: usize, classes: usize, domains: Vec<Domain>) -> Result<Self> {
        if input_dim == 0 || attrs == 0 || classes == 0 {
            return Err(Error::data("header", "d, A and Y must all be positive"));
        }
        if domains.is_empty() {
            return Err(Error::data("domains", "dataset has no domains"));
        }
        let target = domains.len() - 1;
        for (t, dom) in domains.iter().enumerate() {
            for (i, p) in dom.points.iter().enumerate() {
                let loc = point_location(&dom.id, t, i);
                p.validate(input_dim, attrs, classes, &loc)?;
                if t != target {
                    if p.label.is_none() {
                        return Err(Error::data(loc, "auxiliary-domain point has no label"));
                    }
                    if p.role.is_some() {
                        return Err(Error::data(loc, "roles are only allowed in the target domain"));
                    }
                }
            }
        }
        Ok(MultiDomainDataset { input_dim, attrs, classes, domains })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn attrs(&self) -> usize {
        self.attrs
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn target_index(&self) -> usize {
        self.domains.len() - 1
    }

    pub fn target(&self) -> &Domain {
        &self.domains[self.target_index()]
    }

    /// True when every target point carries a role.
    pub fn has_roles(&self) -> bool {
        self.target().points.iter().all(|p| p.role.is_some())
    }

    /// Returns a copy whose target points carry `roles`.
    pub fn with_target_roles(&self, roles: &[Role]) -> Result<Self> {
        let target = self.target_index();
        if roles.len() != self.domains[target].points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} roles for {} target points",
                roles.len(),
                self.domains[target].points.len()
            )));
        }
        let mut out = self.clone();
        for (p, &r) in out.domains[target].points.iter_mut().zip(roles) {
            p.role = Some(r);
        }
        Ok(out)
    }

    /// Target points with the given role, in index order.
    pub fn target_points(&self, role: Role) -> Vec<&DataPoint> {
        self.target().points.iter().filter(|p| p.role == Some(role)).collect()
    }

    /// Target points that take part in training (labelled and unlabelled).
    pub fn target_train_points(&self) -> Vec<&DataPoint> {
        self.target()
            .points
            .iter()
            .filter(|p| matches!(p.role, Some(Role::TrainLabeled | Role::TrainUnlabeled)))
            .collect()
    }

    /// Everything the trainer may see: all auxiliary points plus the target
    /// training half, with labels of unlabelled target points removed.
    pub fn training_set(&self) -> Result<TrainingSet> {
        let target = self.target_index();
        let mut domains: Vec<Vec<DataPoint>> = self.domains[..target]
            .iter()
            .map(|d| d.points.clone())
            .collect();
        let mut tgt = Vec::new();
        for (i, p) in self.domains[target].points.iter().enumerate() {
            let loc = point_location(&self.domains[target].id, target, i);
            match p.role {
                None => return Err(Error::data(loc, "target point has no role; split the target first")),
                Some(Role::Test) => {}
                Some(Role::TrainUnlabeled) => tgt.push(DataPoint { label: None, ..p.clone() }),
                Some(Role::TrainLabeled) => {
                    if p.label.is_none() {
                        return Err(Error::data(loc, "train-labeled point has no label"));
                    }
                    tgt.push(p.clone());
                }
            }
        }
        domains.push(tgt);
        TrainingSet::new(self.input_dim, self.attrs, self.classes, domains)
    }
}

pub(crate) fn point_location(id: &str, domain: usize, point: usize) -> String {
    format!("domain '{id}' (#{domain}), point {point}")
}

/// The data one training run sees. The last domain is the target; its
/// unlabelled points have `label == None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    input_dim: usize,
    attrs: usize,
    classes: usize,
    domains: Vec<Vec<DataPoint>>,
}

impl TrainingSet {
    pub fn new(input_dim: usize, attrs: usize, classes: usize, domains: Vec<Vec<DataPoint>>) -> Result<Self> {
        if domains.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "training needs at least two domains, got {}",
                domains.len()
            )));
        }
        let target = domains.len() - 1;
        for (t, pts) in domains.iter().enumerate() {
            for (i, p) in pts.iter().enumerate() {
                let loc = point_location(&format!("{t}"), t, i);
                p.validate(input_dim, attrs, classes, &loc)?;
                if t != target && p.label.is_none() {
                    return Err(Error::data(loc, "auxiliary-domain point has no label"));
                }
            }
        }
        Ok(TrainingSet { input_dim, attrs, classes, domains })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn attrs(&self) -> usize {
        self.attrs
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn domains(&self) -> &[Vec<DataPoint>] {
        &self.domains
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn target_index(&self) -> usize {
        self.domains.len() - 1
    }

    pub fn target(&self) -> &[DataPoint] {
        &self.domains[self.target_index()]
    }

    pub fn labeled_target_count(&self) -> usize {
        self.target().iter().filter(|p| p.label.is_some()).count()
    }

    /// Same target data, auxiliary domains emptied.
    pub fn target_only(&self) -> TrainingSet {
        let mut domains = vec![Vec::new(); self.domains.len() - 1];
        domains.push(self.target().to_vec());
        TrainingSet { domains, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(label: Option<usize>) -> DataPoint {
        DataPoint::new(Matrix::zeros(2, 3), vec![0, 1], label)
    }

    #[test]
    fn rejects_unlabeled_auxiliary_points() {
        let doms = vec![
            Domain { id: "a".into(), points: vec![point(None)] },
            Domain { id: "t".into(), points: vec![point(None)] },
        ];
        let err = MultiDomainDataset::new(2, 2, 2, doms).unwrap_err();
        assert!(err.to_string().contains("domain 'a'"), "{err}");
    }

    #[test]
    fn training_set_hides_unlabeled_and_test_points() {
        let doms = vec![
            Domain { id: "a".into(), points: vec![point(Some(0)), point(Some(1))] },
            Domain { id: "t".into(), points: vec![point(Some(0)), point(Some(1)), point(Some(1)), point(Some(0))] },
        ];
        let ds = MultiDomainDataset::new(2, 2, 2, doms).unwrap();
        assert!(ds.training_set().is_err());
        let roles = [Role::Test, Role::TrainLabeled, Role::TrainUnlabeled, Role::Test];
        let ds = ds.with_target_roles(&roles).unwrap();
        let ts = ds.training_set().unwrap();
        assert_eq!(ts.domains()[0].len(), 2);
        assert_eq!(ts.target().len(), 2);
        assert_eq!(ts.target()[0].label, Some(1));
        assert_eq!(ts.target()[1].label, None);
        assert_eq!(ts.labeled_target_count(), 1);
        assert!(ts.target_only().domains()[0].is_empty());
    }

    #[test]
    fn role_names_round_trip() {
        for r in [Role::TrainLabeled, Role::TrainUnlabeled, Role::Test] {
            assert_eq!(r.as_str().parse::<Role>().unwrap(), r);
        }
        assert!("train".parse::<Role>().is_err());
    }
}
