//! Pooling readouts that turn per-simplex features into per-sample logits.

use std::collections::BTreeMap;

use crate::nn::layers::activate;
use crate::nn::{BatchStructure, NnError, PoolIndex};
use crate::tensor::{Graph, ParamBinding, ParamId, ParamSet, Var};
use crate::Activation;

/// Two affine layers with a hidden activation.
pub struct MlpHead {
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
    hidden_activation: Activation,
}

impl MlpHead {
    pub fn new(
        prefix: &str,
        in_width: usize,
        hidden: usize,
        out_width: usize,
        hidden_activation: Activation,
        params: &mut ParamSet,
        seed: u64,
    ) -> Result<Self, NnError> {
        Ok(Self {
            w1: params.add_glorot(&format!("{prefix}.w1"), in_width, hidden, seed)?,
            b1: params.add_zeros(&format!("{prefix}.b1"), 1, hidden)?,
            w2: params.add_glorot(&format!("{prefix}.w2"), hidden, out_width, seed)?,
            b2: params.add_zeros(&format!("{prefix}.b2"), 1, out_width)?,
            hidden_activation,
        })
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        x: Var,
    ) -> Result<Var, NnError> {
        let h = g.matmul(x, binding.var(self.w1))?;
        let h = g.add_bias(h, binding.var(self.b1))?;
        let h = activate(g, self.hidden_activation, h);
        let out = g.matmul(h, binding.var(self.w2))?;
        Ok(g.add_bias(out, binding.var(self.b2))?)
    }
}

/// Mean-pools per-simplex rows into one row per sample. Samples with no
/// simplices in this dimension pool to zeros.
pub fn pool_mean(g: &mut Graph, x: Var, pool: &PoolIndex) -> Result<Var, NnError> {
    let weights = g.input(pool.weights.clone());
    Ok(g.segment_weighted_sum(
        weights,
        x,
        std::rc::Rc::clone(&pool.sources),
        std::rc::Rc::clone(&pool.seg),
    )?)
}

/// Hierarchical readout: for every dimension the model carries, the
/// per-layer outputs concatenate column-wise (a residual summary of the
/// whole stack), mean-pool per sample, and the per-dimension summaries
/// concatenate again before the classifier head.
pub fn hierarchical_readout(
    g: &mut Graph,
    binding: &ParamBinding,
    per_layer: &[BTreeMap<usize, Var>],
    batch: &BatchStructure,
    head: &MlpHead,
) -> Result<Var, NnError> {
    assert!(!per_layer.is_empty(), "readout needs at least one layer");
    let mut pooled = Vec::new();
    for (&k, structure) in &batch.dims {
        let layer_outputs: Vec<Var> = per_layer.iter().map(|features| features[&k]).collect();
        let stacked = if layer_outputs.len() == 1 {
            layer_outputs[0]
        } else {
            g.concat_columns(&layer_outputs)?
        };
        pooled.push(pool_mean(g, stacked, &structure.pool)?);
    }
    let joined = if pooled.len() == 1 {
        pooled[0]
    } else {
        g.concat_columns(&pooled)?
    };
    head.forward(g, binding, joined)
}

/// Orientation-invariant readout for edge-level tasks: absolute value,
/// mean over each sample's edges, then the classifier head. Errors if any
/// sample has no edges, since its mean would be meaningless.
pub fn trajectory_readout(
    g: &mut Graph,
    binding: &ParamBinding,
    edge_features: Var,
    batch: &BatchStructure,
    head: &MlpHead,
) -> Result<Var, NnError> {
    let pool = &batch.dim(1).pool;
    for (sample, range) in pool.seg.ranges().enumerate() {
        if range.is_empty() {
            return Err(NnError::EmptyPool { sample, dim: 1 });
        }
    }
    let magnitudes = g.abs(edge_features);
    let pooled = pool_mean(g, magnitudes, pool)?;
    head.forward(g, binding, pooled)
}
