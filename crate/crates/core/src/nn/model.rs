//! Assembles layers into the two experiment architectures: multi-dimension
//! stacks with a hierarchical classifier, and edge-level stacks with an
//! orientation-invariant binary head.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::nn::layers::{GcnLayer, SatLayer, SatLayerSpec, ScconvLayer, ScconvLayerSpec, ScnLayer};
use crate::nn::readout::{hierarchical_readout, trajectory_readout, MlpHead};
use crate::nn::{BatchOptions, BatchStructure, NnError};
use crate::tensor::{Graph, ParamBinding, ParamSet, Var};
use crate::Activation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gcn,
    Gat,
    Scn,
    Scconv,
    Sat,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Gcn => "gcn",
            ModelKind::Gat => "gat",
            ModelKind::Scn => "scn",
            ModelKind::Scconv => "scconv",
            ModelKind::Sat => "sat",
        }
    }
}

/// Which readout the network ends in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Hierarchical pooled classification over every carried dimension.
    Classification,
    /// Orientation-invariant binary readout over edge features.
    EdgeOrientation,
}

/// Full architecture description. `input_widths` lists the dimensions the
/// model carries and their input feature widths; `hidden` is the per-head
/// channel count for attention models and the plain channel count
/// otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub kind: ModelKind,
    pub task: TaskKind,
    pub input_widths: BTreeMap<usize, usize>,
    pub layers: usize,
    pub hidden: usize,
    #[serde(default = "default_heads")]
    pub heads: usize,
    #[serde(default)]
    pub signed: bool,
    #[serde(default)]
    pub bias: bool,
    pub activation: Activation,
    pub readout_hidden: usize,
    pub classes: usize,
    /// Adds each layer's input back onto its output when the widths match.
    #[serde(default)]
    pub residual: bool,
}

fn default_heads() -> usize {
    1
}

enum LayerStack {
    Gcn(GcnLayer),
    Sat(BTreeMap<usize, SatLayer>),
    Scn(BTreeMap<usize, ScnLayer>),
    Scconv(BTreeMap<usize, ScconvLayer>),
}

pub struct Network {
    spec: NetworkSpec,
    stacks: Vec<LayerStack>,
    readout: MlpHead,
}

impl Network {
    /// Registers every parameter of the architecture into `params` and
    /// returns the assembled network. Initial values depend only on the
    /// seed and the parameter names.
    pub fn build(spec: &NetworkSpec, params: &mut ParamSet, seed: u64) -> Result<Self, NnError> {
        if spec.input_widths.is_empty() {
            return Err(NnError::NoDims);
        }
        if spec.layers == 0 {
            return Err(NnError::NoLayers);
        }
        if spec.task == TaskKind::EdgeOrientation && !spec.input_widths.contains_key(&1) {
            return Err(NnError::MissingFeatures(1));
        }
        let dims: Vec<usize> = spec.input_widths.keys().copied().collect();
        let top_dim = *dims.last().expect("non-empty");
        let layer_out = match spec.kind {
            ModelKind::Sat | ModelKind::Gat => spec.heads * spec.hidden,
            _ => spec.hidden,
        };

        let mut widths: BTreeMap<usize, usize> = spec.input_widths.clone();
        let mut stacks = Vec::with_capacity(spec.layers);
        for layer in 0..spec.layers {
            let stack = match spec.kind {
                ModelKind::Gcn | ModelKind::Gat => {
                    if dims != [0] {
                        return Err(NnError::VertexOnlyModel(spec.kind.label()));
                    }
                    let prefix = format!("layer{layer}.dim0");
                    match spec.kind {
                        ModelKind::Gcn => LayerStack::Gcn(GcnLayer::new(
                            &prefix,
                            widths[&0],
                            spec.hidden,
                            spec.activation,
                            params,
                            seed,
                        )?),
                        _ => LayerStack::Sat(
                            [(
                                0,
                                SatLayer::new(
                                    &prefix,
                                    SatLayerSpec {
                                        dim: 0,
                                        in_channels: widths[&0],
                                        out_channels: spec.hidden,
                                        heads: spec.heads,
                                        signed: false,
                                        bias: spec.bias,
                                        activation: spec.activation,
                                    },
                                    params,
                                    seed,
                                )?,
                            )]
                            .into_iter()
                            .collect(),
                        ),
                    }
                }
                ModelKind::Sat => {
                    let mut per_dim = BTreeMap::new();
                    for &k in &dims {
                        let layer_spec = SatLayerSpec {
                            dim: k,
                            in_channels: widths[&k],
                            out_channels: spec.hidden,
                            heads: spec.heads,
                            signed: spec.signed,
                            bias: spec.bias && !spec.signed,
                            activation: spec.activation,
                        };
                        per_dim.insert(
                            k,
                            SatLayer::new(&format!("layer{layer}.dim{k}"), layer_spec, params, seed)?,
                        );
                    }
                    LayerStack::Sat(per_dim)
                }
                ModelKind::Scn => {
                    let mut per_dim = BTreeMap::new();
                    for &k in &dims {
                        per_dim.insert(
                            k,
                            ScnLayer::new(
                                &format!("layer{layer}.dim{k}"),
                                widths[&k],
                                spec.hidden,
                                spec.activation,
                                params,
                                seed,
                            )?,
                        );
                    }
                    LayerStack::Scn(per_dim)
                }
                ModelKind::Scconv => {
                    let mut per_dim = BTreeMap::new();
                    for &k in &dims {
                        let layer_spec = ScconvLayerSpec {
                            in_channels: widths[&k],
                            out_channels: spec.hidden,
                            has_down: k > 0,
                            has_up: k < top_dim,
                            in_below: k.checked_sub(1).and_then(|b| widths.get(&b).copied()),
                            in_above: widths.get(&(k + 1)).copied(),
                            activation: spec.activation,
                        };
                        per_dim.insert(
                            k,
                            ScconvLayer::new(
                                &format!("layer{layer}.dim{k}"),
                                layer_spec,
                                params,
                                seed,
                            )?,
                        );
                    }
                    LayerStack::Scconv(per_dim)
                }
            };
            stacks.push(stack);
            for width in widths.values_mut() {
                *width = layer_out;
            }
        }

        let (readout_in, classes) = match spec.task {
            TaskKind::Classification => (spec.layers * layer_out * dims.len(), spec.classes),
            TaskKind::EdgeOrientation => (layer_out, spec.classes),
        };
        let readout = MlpHead::new(
            "readout",
            readout_in,
            spec.readout_hidden,
            classes,
            Activation::Relu,
            params,
            seed,
        )?;
        Ok(Self {
            spec: spec.clone(),
            stacks,
            readout,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    /// The batch assembly options this architecture needs.
    pub fn batch_options(&self) -> BatchOptions {
        BatchOptions {
            dims: self.spec.input_widths.clone(),
            signed: self.spec.signed,
        }
    }

    /// Runs the whole network on a prepared batch and returns the logits,
    /// one row per sample.
    pub fn forward(
        &self,
        g: &mut Graph,
        binding: &ParamBinding,
        batch: &BatchStructure,
    ) -> Result<Var, NnError> {
        let mut current: BTreeMap<usize, Var> = BTreeMap::new();
        for (&k, tensor) in &batch.inputs {
            current.insert(k, g.input(tensor.clone()));
        }
        let mut per_layer: Vec<BTreeMap<usize, Var>> = Vec::with_capacity(self.stacks.len());
        for stack in &self.stacks {
            let mut next: BTreeMap<usize, Var> = BTreeMap::new();
            match stack {
                LayerStack::Gcn(layer) => {
                    let out = layer.forward(g, binding, current[&0], batch.dim(0))?;
                    next.insert(0, out);
                }
                LayerStack::Sat(per_dim) => {
                    for (&k, layer) in per_dim {
                        let out = layer.forward(g, binding, current[&k], batch.dim(k))?;
                        next.insert(k, out);
                    }
                }
                LayerStack::Scn(per_dim) => {
                    for (&k, layer) in per_dim {
                        let out = layer.forward(g, binding, current[&k], batch.dim(k))?;
                        next.insert(k, out);
                    }
                }
                LayerStack::Scconv(per_dim) => {
                    for (&k, layer) in per_dim {
                        let below = k.checked_sub(1).and_then(|b| current.get(&b).copied());
                        let above = current.get(&(k + 1)).copied();
                        let out =
                            layer.forward(g, binding, below, current[&k], above, batch.dim(k))?;
                        next.insert(k, out);
                    }
                }
            }
            if self.spec.residual {
                for (&k, out) in next.iter_mut() {
                    let previous = current[&k];
                    if g.shape(previous) == g.shape(*out) {
                        *out = g.add(previous, *out)?;
                    }
                }
            }
            per_layer.push(next.clone());
            current = next;
        }
        match self.spec.task {
            TaskKind::Classification => {
                hierarchical_readout(g, binding, &per_layer, batch, &self.readout)
            }
            TaskKind::EdgeOrientation => {
                trajectory_readout(g, binding, current[&1], batch, &self.readout)
            }
        }
    }
}
