//! Message-passing layers over one dimension of a complex: attention
//! layers (simplicial and their graph restriction) and spectral baselines.

use crate::nn::attention::{attention_messages, AttentionHead};
use crate::nn::{DimStructure, NnError};
use crate::tensor::{Graph, ParamBinding, ParamId, ParamSet, Var};
use crate::Activation;

pub(crate) fn activate(g: &mut Graph, activation: Activation, v: Var) -> Var {
    match activation {
        Activation::Identity => v,
        Activation::Relu => g.relu(v),
        Activation::Tanh => g.tanh(v),
        Activation::LeakyRelu => g.leaky_relu(v, 0.01),
    }
}

/// Shape and mode of one attention layer on one dimension.
#[derive(Clone, Copy, Debug)]
pub struct SatLayerSpec {
    pub dim: usize,
    pub in_channels: usize,
    /// Channels per head; the layer emits `heads * out_channels`.
    pub out_channels: usize,
    pub heads: usize,
    /// Signed mode scores |Wh| and keeps orientation signs on the
    /// coefficients; it admits no bias so the layer stays odd.
    pub signed: bool,
    pub bias: bool,
    pub activation: Activation,
}

struct SatHeadIds {
    up_weight: ParamId,
    up_target: ParamId,
    up_source: ParamId,
    down: Option<(ParamId, ParamId, ParamId)>,
    bias: Option<ParamId>,
}

/// Attention layer on one dimension: per head, softmax-normalized scores
/// over the upper and lower neighborhoods weight projected neighbor
/// features, the two directions are summed and activated, and heads
/// concatenate. Dimension 0 has no lower neighborhood, so only the upper
/// path exists there; that restriction in unsigned mode is exactly a
/// graph attention layer.
pub struct SatLayer {
    spec: SatLayerSpec,
    heads: Vec<SatHeadIds>,
}

impl SatLayer {
    pub fn new(
        prefix: &str,
        spec: SatLayerSpec,
        params: &mut ParamSet,
        seed: u64,
    ) -> Result<Self, NnError> {
        assert!(spec.heads > 0, "attention layer needs at least one head");
        assert!(
            !(spec.signed && spec.bias),
            "signed mode admits no bias terms"
        );
        let mut heads = Vec::with_capacity(spec.heads);
        for z in 0..spec.heads {
            let name = |part: &str| format!("{prefix}.head{z}.{part}");
            let up_weight =
                params.add_glorot(&name("up.w"), spec.in_channels, spec.out_channels, seed)?;
            let up_target = params.add_glorot(&name("up.a_target"), spec.out_channels, 1, seed)?;
            let up_source = params.add_glorot(&name("up.a_source"), spec.out_channels, 1, seed)?;
            let down = if spec.dim > 0 {
                Some((
                    params.add_glorot(&name("down.w"), spec.in_channels, spec.out_channels, seed)?,
                    params.add_glorot(&name("down.a_target"), spec.out_channels, 1, seed)?,
                    params.add_glorot(&name("down.a_source"), spec.out_channels, 1, seed)?,
                ))
            } else {
                None
            };
            let bias = spec
                .bias
                .then(|| params.add_zeros(&name("bias"), 1, spec.out_channels))
                .transpose()?;
            heads.push(SatHeadIds {
                up_weight,
                up_target,
                up_source,
                down,
                bias,
            });
        }
        Ok(Self { spec, heads })
    }

    pub fn spec(&self) -> &SatLayerSpec {
        &self.spec
    }

    pub fn out_width(&self) -> usize {
        self.spec.heads * self.spec.out_channels
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        h: Var,
        structure: &DimStructure,
    ) -> Result<Var, NnError> {
        let mut outputs = Vec::with_capacity(self.heads.len());
        for ids in &self.heads {
            let up_head = AttentionHead {
                weight: binding.var(ids.up_weight),
                a_target: binding.var(ids.up_target),
                a_source: binding.var(ids.up_source),
            };
            let (up_messages, _) = attention_messages(g, h, up_head, &structure.up)?;
            let mut pre = up_messages;
            if let Some((w, a_target, a_source)) = ids.down {
                let down_head = AttentionHead {
                    weight: binding.var(w),
                    a_target: binding.var(a_target),
                    a_source: binding.var(a_source),
                };
                let (down_messages, _) = attention_messages(g, h, down_head, &structure.down)?;
                pre = g.add(pre, down_messages)?;
            }
            if let Some(b) = ids.bias {
                pre = g.add_bias(pre, binding.var(b))?;
            }
            outputs.push(activate(g, self.spec.activation, pre));
        }
        if outputs.len() == 1 {
            Ok(outputs[0])
        } else {
            Ok(g.concat_columns(&outputs)?)
        }
    }
}

/// Graph attention layer: the dimension-0, unsigned restriction of the
/// simplicial attention layer, sharing its code path and parameter layout.
pub struct GatLayer(SatLayer);

impl GatLayer {
    pub fn new(
        prefix: &str,
        in_channels: usize,
        out_channels: usize,
        heads: usize,
        bias: bool,
        activation: Activation,
        params: &mut ParamSet,
        seed: u64,
    ) -> Result<Self, NnError> {
        let spec = SatLayerSpec {
            dim: 0,
            in_channels,
            out_channels,
            heads,
            signed: false,
            bias,
            activation,
        };
        Ok(Self(SatLayer::new(prefix, spec, params, seed)?))
    }

    pub fn out_width(&self) -> usize {
        self.0.out_width()
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        h: Var,
        structure: &DimStructure,
    ) -> Result<Var, NnError> {
        self.0.forward(g, binding, h, structure)
    }
}

/// Vertex-level graph convolution: act(A_hat H W + b) with the
/// self-loop-augmented, symmetrically normalized adjacency.
pub struct GcnLayer {
    weight: ParamId,
    bias: ParamId,
    activation: Activation,
}

impl GcnLayer {
    pub fn new(
        prefix: &str,
        in_channels: usize,
        out_channels: usize,
        activation: Activation,
        params: &mut ParamSet,
        seed: u64,
    ) -> Result<Self, NnError> {
        Ok(Self {
            weight: params.add_glorot(&format!("{prefix}.w"), in_channels, out_channels, seed)?,
            bias: params.add_zeros(&format!("{prefix}.b"), 1, out_channels)?,
            activation,
        })
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        h: Var,
        structure: &DimStructure,
    ) -> Result<Var, NnError> {
        let adjacency = structure
            .gcn_adjacency
            .clone()
            .expect("graph convolution runs on dimension 0");
        let projected = g.matmul(h, binding.var(self.weight))?;
        let diffused = g.sparse_matmul(adjacency, projected)?;
        let shifted = g.add_bias(diffused, binding.var(self.bias))?;
        Ok(activate(g, self.activation, shifted))
    }
}

/// Spectral convolution on one dimension: act(L_norm H W) where L_norm is
/// the symmetrically degree-normalized Hodge Laplacian.
pub struct ScnLayer {
    weight: ParamId,
    activation: Activation,
}

impl ScnLayer {
    pub fn new(
        prefix: &str,
        in_channels: usize,
        out_channels: usize,
        activation: Activation,
        params: &mut ParamSet,
        seed: u64,
    ) -> Result<Self, NnError> {
        Ok(Self {
            weight: params.add_glorot(&format!("{prefix}.w"), in_channels, out_channels, seed)?,
            activation,
        })
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        h: Var,
        structure: &DimStructure,
    ) -> Result<Var, NnError> {
        let projected = g.matmul(h, binding.var(self.weight))?;
        let diffused = g.sparse_matmul(structure.lap_norm.clone(), projected)?;
        Ok(activate(g, self.activation, diffused))
    }
}

/// Which coupling terms a convolution on one dimension has available.
#[derive(Clone, Copy, Debug)]
pub struct ScconvLayerSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    /// Lower Laplacian term (absent on dimension 0).
    pub has_down: bool,
    /// Upper Laplacian term (absent on the top dimension).
    pub has_up: bool,
    /// Width of the dimension below, when the model carries it.
    pub in_below: Option<usize>,
    /// Width of the dimension above, when the model carries it.
    pub in_above: Option<usize>,
    pub activation: Activation,
}

/// Coupled simplicial convolution on one dimension: normalized lower and
/// upper Laplacian terms on the dimension's own features, plus incidence
/// terms pulling features from the dimensions below and above through
/// normalized absolute boundary maps.
pub struct ScconvLayer {
    spec: ScconvLayerSpec,
    w_down: Option<ParamId>,
    w_up: Option<ParamId>,
    w_below: Option<ParamId>,
    w_above: Option<ParamId>,
}

impl ScconvLayer {
    pub fn new(
        prefix: &str,
        spec: ScconvLayerSpec,
        params: &mut ParamSet,
        seed: u64,
    ) -> Result<Self, NnError> {
        let glorot = |params: &mut ParamSet, part: &str, rows: usize| {
            params.add_glorot(&format!("{prefix}.{part}"), rows, spec.out_channels, seed)
        };
        let w_down = spec
            .has_down
            .then(|| glorot(params, "w_down", spec.in_channels))
            .transpose()?;
        let w_up = spec
            .has_up
            .then(|| glorot(params, "w_up", spec.in_channels))
            .transpose()?;
        let w_below = spec
            .in_below
            .map(|width| glorot(params, "w_below", width))
            .transpose()?;
        let w_above = spec
            .in_above
            .map(|width| glorot(params, "w_above", width))
            .transpose()?;
        assert!(
            w_down.is_some() || w_up.is_some() || w_below.is_some() || w_above.is_some(),
            "coupled convolution needs at least one term"
        );
        Ok(Self {
            spec,
            w_down,
            w_up,
            w_below,
            w_above,
        })
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        h_below: Option<Var>,
        h: Var,
        h_above: Option<Var>,
        structure: &DimStructure,
    ) -> Result<Var, NnError> {
        let mut total: Option<Var> = None;
        let mut accumulate = |g: &mut Graph, term: Var| -> Result<(), NnError> {
            total = Some(match total {
                Some(t) => g.add(t, term)?,
                None => term,
            });
            Ok(())
        };
        if let Some(w) = self.w_down {
            let projected = g.matmul(h, binding.var(w))?;
            let term = g.sparse_matmul(structure.lap_down_norm.clone(), projected)?;
            accumulate(g, term)?;
        }
        if let Some(w) = self.w_up {
            let projected = g.matmul(h, binding.var(w))?;
            let term = g.sparse_matmul(structure.lap_up_norm.clone(), projected)?;
            accumulate(g, term)?;
        }
        if let Some(w) = self.w_below {
            let below = h_below.expect("layer was built with a below term");
            let projected = g.matmul(below, binding.var(w))?;
            let map = structure.from_below.clone().expect("dimension above zero");
            let term = g.sparse_matmul(map, projected)?;
            accumulate(g, term)?;
        }
        if let Some(w) = self.w_above {
            let above = h_above.expect("layer was built with an above term");
            let projected = g.matmul(above, binding.var(w))?;
            let map = structure.from_above.clone().expect("always built");
            let term = g.sparse_matmul(map, projected)?;
            accumulate(g, term)?;
        }
        let total = total.expect("at least one term");
        Ok(activate(g, self.spec.activation, total))
    }
}
