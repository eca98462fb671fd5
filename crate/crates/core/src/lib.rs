//! Cross-domain classification with convolutional attribute embeddings.
//!
//! Each data point is a `d × L` matrix of instance columns plus a binary
//! attribute vector. Three single-layer convolutional encoders read it: one
//! shared across domains, one per domain, and one whose output is tied to
//! the attributes through a linear map. Their stacked outputs feed a linear
//! head per domain. Training minimises squared label error plus attribute
//! mapping, cross-domain mean matching and target-neighbour smoothness
//! penalties by fixed-step sub-gradient descent.
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod cli;
pub mod config;
pub mod convnet;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod model;
pub mod numeric;
pub mod objective;
pub mod persist;
pub mod trainer;

pub use convnet::{ConvBlock, ForwardTrace};
pub use dataset::{
    build_neighbor_graph, generate_synthetic, load_dataset, save_dataset, split_target, DataPoint, Domain,
    MultiDomainDataset, NeighborGraph, Role, SynthSpec, TrainingSet,
};
pub use error::{Error, Result};
pub use model::{embed_attributes, predict, BlockId, Dims, ModelParams, Representation};
pub use numeric::{frob_sq, matmul, rand_uniform, Matrix, Rng};
pub use objective::{gradient, objective, GradientSet, LossWeights, ObjectiveBreakdown};
pub use persist::{load_model, save_model};

pub use trainer::{evaluate, train, TrainConfig, TrainOutcome, UpdateMode};
