//! Neural network layers over simplicial complexes, and the baselines they
//! are compared against.

mod attention;
mod features;
mod layers;
mod model;
mod readout;
mod structure;

pub use attention::{
    attention_messages, sat_attention, AttentionCoefficients, AttentionEntry, AttentionHead,
    AttentionHeadParams,
};
pub use features::CochainFeatures;
pub use layers::{GatLayer, GcnLayer, SatLayer, SatLayerSpec, ScconvLayer, ScconvLayerSpec, ScnLayer};
pub use model::{ModelKind, Network, NetworkSpec, TaskKind};
pub use readout::{hierarchical_readout, pool_mean, trajectory_readout, MlpHead};
pub use structure::{
    BatchOptions, BatchSample, BatchStructure, DimStructure, FlatAdjacency, PoolIndex,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::TensorError;

#[derive(Debug, Error)]
pub enum NnError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("no features provided for dimension {0}")]
    MissingFeatures(usize),
    #[error("dimension {dim}: features are {got} columns wide, expected {expected}")]
    FeatureWidth {
        dim: usize,
        got: usize,
        expected: usize,
    },
    #[error("dimension {dim}: {got} feature rows for {expected} simplices")]
    FeatureRows {
        dim: usize,
        got: usize,
        expected: usize,
    },
    #[error("sample {sample} has no simplices of dimension {dim} to pool")]
    EmptyPool { sample: usize, dim: usize },
    #[error("batch has {got} samples, structure was built for {expected}")]
    BatchSize { got: usize, expected: usize },
    #[error("model carries no dimensions")]
    NoDims,
    #[error("model has no layers")]
    NoLayers,
    #[error("{0} models operate on vertices only")]
    VertexOnlyModel(&'static str),
}

/// Pointwise nonlinearity selectable from experiment configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[serde(alias = "id")]
    Identity,
    Relu,
    Tanh,
    LeakyRelu,
}

impl Activation {
    /// True when the function is odd (f(-x) = -f(x)), the property that
    /// makes a layer using it commute with orientation flips.
    pub fn is_odd(self) -> bool {
        matches!(self, Activation::Identity | Activation::Tanh)
    }

    pub fn label(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::LeakyRelu => "leaky_relu",
        }
    }
}
