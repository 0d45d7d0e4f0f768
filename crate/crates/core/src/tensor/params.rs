use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::Tensor;
use super::graph::{Graph, Var};
use super::TensorError;

/// Handle to one named parameter in a [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

pub(super) struct Param {
    pub(super) name: String,
    pub(super) value: Tensor,
    pub(super) grad: Option<Tensor>,
}

/// A named collection of trainable tensors.
///
/// Parameters keep insertion order (optimizer state is aligned to it);
/// checkpoints sort by name so files do not depend on construction order.
/// Gradients start absent and become present once accumulated from a graph.
#[derive(Default)]
pub struct ParamSet {
    pub(super) params: Vec<Param>,
    by_name: HashMap<String, usize>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId, TensorError> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(TensorError::DuplicateParam(name));
        }
        let id = ParamId(self.params.len());
        self.by_name.insert(name.clone(), id.0);
        self.params.push(Param {
            name,
            value,
            grad: None,
        });
        Ok(id)
    }

    /// Adds a matrix drawn uniformly from ±sqrt(6 / (rows + cols)). The rng
    /// is derived from the seed and the parameter name, so initial values do
    /// not depend on registration order.
    pub fn add_glorot(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        seed: u64,
    ) -> Result<ParamId, TensorError> {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let mut rng = name_rng(seed, name);
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        self.add(name, Tensor::new(rows, cols, data)?)
    }

    pub fn add_zeros(&mut self, name: &str, rows: usize, cols: usize) -> Result<ParamId, TensorError> {
        self.add(name, Tensor::zeros(rows, cols))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).map(|&i| ParamId(i))
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> Option<&Tensor> {
        self.params[id.0].grad.as_ref()
    }

    /// Number of parameters (tensors, not scalars).
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of trainable scalars.
    pub fn count_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    /// Parameter ids sorted by name, the checkpoint order.
    pub fn ids_by_name(&self) -> Vec<ParamId> {
        let mut ids: Vec<ParamId> = self.ids().collect();
        ids.sort_by(|a, b| self.params[a.0].name.cmp(&self.params[b.0].name));
        ids
    }

    /// Drops all accumulated gradients.
    pub fn clear_grads(&mut self) {
        for p in &mut self.params {
            p.grad = None;
        }
    }

    /// Registers every parameter value as a graph leaf.
    pub fn bind(&self, graph: &mut Graph) -> ParamBinding {
        ParamBinding {
            vars: self
                .params
                .iter()
                .map(|p| graph.input(p.value.clone()))
                .collect(),
        }
    }

    /// Adds the gradients the graph computed for the bound leaves into this
    /// set's gradient buffers.
    pub fn accumulate_grads(&mut self, graph: &Graph, binding: &ParamBinding) {
        for (p, &var) in self.params.iter_mut().zip(&binding.vars) {
            let incoming = graph.grad_slice(var);
            match &mut p.grad {
                Some(g) => {
                    for (acc, &v) in g.data_mut().iter_mut().zip(incoming) {
                        *acc += v;
                    }
                }
                None => {
                    let (r, c) = p.value.shape();
                    p.grad = Some(
                        Tensor::new(r, c, incoming.to_vec()).expect("leaf shape matches value"),
                    );
                }
            }
        }
    }
}

/// Graph leaves for every parameter of one [`ParamSet`], in id order.
pub struct ParamBinding {
    vars: Vec<Var>,
}

impl ParamBinding {
    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.0]
    }
}

/// Deterministic per-name rng: mixes the run seed with an FNV-1a hash of the
/// parameter name.
fn name_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&fnv1a(name.as_bytes()).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

fn fnv1a(data: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
