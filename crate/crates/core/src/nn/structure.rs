//! Assembles the index structures and normalized operators a batch of
//! complexes needs: block-diagonal adjacency segments for attention,
//! per-sample pooling indices, and the sparse operators the baselines use.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::complex::{Neighbor, SimplicialComplex};
use crate::nn::{CochainFeatures, NnError};
use crate::sparse::{CsrMatrix, IntSparseMatrix};
use crate::tensor::{SegmentIndex, Tensor};

/// Flattened adjacency for one dimension of a (possibly batched) complex.
///
/// Entry e says: target simplex `targets[e]` receives from `sources[e]`
/// with relative orientation `signs[e]`. Entries form one segment per
/// target, targets ascending; `signs` is None in unsigned mode.
#[derive(Clone)]
pub struct FlatAdjacency {
    pub seg: Rc<SegmentIndex>,
    pub targets: Rc<Vec<usize>>,
    pub sources: Rc<Vec<usize>>,
    pub signs: Option<Tensor>,
}

/// Mean-pooling of per-simplex rows into one row per sample.
#[derive(Clone)]
pub struct PoolIndex {
    pub seg: Rc<SegmentIndex>,
    pub sources: Rc<Vec<usize>>,
    pub weights: Tensor,
}

/// Everything one feature dimension of a batch needs: attention adjacency,
/// pooling, and degree-normalized sparse operators for the baselines.
///
/// `from_below` maps dimension k-1 rows to dimension k rows (normalized
/// |B_k| transposed); `from_above` maps k+1 rows down (normalized |B_{k+1}|).
#[derive(Clone)]
pub struct DimStructure {
    pub n: usize,
    pub up: FlatAdjacency,
    pub down: FlatAdjacency,
    pub pool: PoolIndex,
    pub lap_norm: Rc<CsrMatrix>,
    pub lap_down_norm: Rc<CsrMatrix>,
    pub lap_up_norm: Rc<CsrMatrix>,
    pub from_below: Option<Rc<CsrMatrix>>,
    pub from_above: Option<Rc<CsrMatrix>>,
    pub gcn_adjacency: Option<Rc<CsrMatrix>>,
}

/// A batch of complexes laid out block-diagonally, with stacked input
/// features per dimension.
pub struct BatchStructure {
    pub n_samples: usize,
    pub dims: BTreeMap<usize, DimStructure>,
    pub inputs: BTreeMap<usize, Tensor>,
}

/// One sample: a complex plus its input cochain features.
#[derive(Clone, Copy)]
pub struct BatchSample<'a> {
    pub complex: &'a SimplicialComplex,
    pub features: &'a CochainFeatures,
}

/// What to assemble: which dimensions the model carries (with their input
/// widths) and whether attention sees orientation signs.
#[derive(Clone, Debug)]
pub struct BatchOptions {
    pub dims: BTreeMap<usize, usize>,
    pub signed: bool,
}

struct FlatAccum {
    lengths: Vec<usize>,
    targets: Vec<usize>,
    sources: Vec<usize>,
    signs: Vec<f64>,
}

impl FlatAccum {
    fn new() -> Self {
        Self {
            lengths: Vec::new(),
            targets: Vec::new(),
            sources: Vec::new(),
            signs: Vec::new(),
        }
    }

    fn extend(&mut self, lists: &[Vec<Neighbor>], offset: usize) {
        for (local, list) in lists.iter().enumerate() {
            self.lengths.push(list.len());
            for nb in list {
                self.targets.push(offset + local);
                self.sources.push(offset + nb.index);
                self.signs.push(nb.sign);
            }
        }
    }

    fn finish(self, signed: bool) -> FlatAdjacency {
        let signs = if signed {
            let n = self.signs.len();
            Some(Tensor::new(n, 1, self.signs).expect("one sign per entry"))
        } else {
            None
        };
        FlatAdjacency {
            seg: Rc::new(SegmentIndex::from_lengths(&self.lengths)),
            targets: Rc::new(self.targets),
            sources: Rc::new(self.sources),
            signs,
        }
    }
}

impl BatchStructure {
    pub fn build(samples: &[BatchSample], options: &BatchOptions) -> Result<Self, NnError> {
        let mut dims = BTreeMap::new();
        let mut inputs = BTreeMap::new();
        for (&k, &width) in &options.dims {
            let (structure, stacked) = build_dim(samples, k, width, options.signed)?;
            dims.insert(k, structure);
            inputs.insert(k, stacked);
        }
        Ok(Self {
            n_samples: samples.len(),
            dims,
            inputs,
        })
    }

    pub fn dim(&self, k: usize) -> &DimStructure {
        &self.dims[&k]
    }

    /// Reuses this batch's index structures with the features of another
    /// batch of samples over the same complexes. The per-dimension simplex
    /// counts must match the structure exactly.
    pub fn with_inputs(&self, samples: &[BatchSample]) -> Result<Self, NnError> {
        if samples.len() != self.n_samples {
            return Err(NnError::BatchSize { got: samples.len(), expected: self.n_samples });
        }
        let mut inputs = BTreeMap::new();
        for (&k, structure) in &self.dims {
            let width = self.inputs[&k].cols();
            let mut stacked = Vec::with_capacity(structure.n * width);
            for (i, sample) in samples.iter().enumerate() {
                let n = structure.pool.seg.range(i).len();
                if n == 0 {
                    continue;
                }
                let f = sample.features.get(k).ok_or(NnError::MissingFeatures(k))?;
                if f.cols() != width {
                    return Err(NnError::FeatureWidth { dim: k, got: f.cols(), expected: width });
                }
                if f.rows() != n {
                    return Err(NnError::FeatureRows { dim: k, got: f.rows(), expected: n });
                }
                stacked.extend_from_slice(f.data());
            }
            inputs.insert(k, Tensor::new(structure.n, width, stacked)?);
        }
        Ok(Self {
            n_samples: samples.len(),
            dims: self.dims.clone(),
            inputs,
        })
    }
}

fn build_dim(
    samples: &[BatchSample],
    k: usize,
    width: usize,
    signed: bool,
) -> Result<(DimStructure, Tensor), NnError> {
    let counts: Vec<usize> = samples.iter().map(|s| s.complex.num_simplices(k)).collect();
    let below_counts: Vec<usize> = if k > 0 {
        samples
            .iter()
            .map(|s| s.complex.num_simplices(k - 1))
            .collect()
    } else {
        Vec::new()
    };
    let above_counts: Vec<usize> = samples
        .iter()
        .map(|s| s.complex.num_simplices(k + 1))
        .collect();
    let total: usize = counts.iter().sum();

    let mut up = FlatAccum::new();
    let mut down = FlatAccum::new();
    let mut stacked = Vec::with_capacity(total * width);
    let mut pool_lengths = Vec::with_capacity(samples.len());
    let mut pool_weights = Vec::with_capacity(total);

    let mut lap = Vec::new();
    let mut lap_down = Vec::new();
    let mut lap_up = Vec::new();
    let mut from_below = Vec::new();
    let mut from_above = Vec::new();
    let mut gcn = Vec::new();

    let mut offset = 0;
    let mut below_offset = 0;
    let mut above_offset = 0;
    for (i, sample) in samples.iter().enumerate() {
        let c = sample.complex;
        let n = counts[i];
        pool_lengths.push(n);
        if n > 0 {
            pool_weights.extend(std::iter::repeat(1.0 / n as f64).take(n));
            match sample.features.get(k) {
                Some(f) => {
                    if f.cols() != width {
                        return Err(NnError::FeatureWidth {
                            dim: k,
                            got: f.cols(),
                            expected: width,
                        });
                    }
                    if f.rows() != n {
                        return Err(NnError::FeatureRows {
                            dim: k,
                            got: f.rows(),
                            expected: n,
                        });
                    }
                    stacked.extend_from_slice(f.data());
                }
                None => return Err(NnError::MissingFeatures(k)),
            }

            let table = if signed {
                c.neighborhoods(k).expect("k has simplices")
            } else {
                c.neighborhoods(k).expect("k has simplices").to_unsigned()
            };
            up.extend(&table.up, offset);
            down.extend(&table.down, offset);

            let parts = c.hodge_laplacian(k).expect("k has simplices");
            append_sym_norm(&parts.full, offset, &mut lap);
            append_sym_norm(&parts.down, offset, &mut lap_down);
            append_sym_norm(&parts.up, offset, &mut lap_up);

            if k == 0 {
                append_gcn_norm(c, offset, &mut gcn);
            }
            if k > 0 {
                if let Ok(b) = c.boundary_matrix(k) {
                    // |B_k| transposed: rows are the k-simplices
                    append_rect_abs_norm(b, true, offset, below_offset, &mut from_below);
                }
            }
            if let Ok(b) = c.boundary_matrix(k + 1) {
                append_rect_abs_norm(b, false, offset, above_offset, &mut from_above);
            }
        }
        offset += n;
        below_offset += below_counts.get(i).copied().unwrap_or(0);
        above_offset += above_counts[i];
    }

    let total_below: usize = below_counts.iter().sum();
    let total_above: usize = above_counts.iter().sum();
    let structure = DimStructure {
        n: total,
        up: up.finish(signed),
        down: down.finish(signed),
        pool: PoolIndex {
            seg: Rc::new(SegmentIndex::from_lengths(&pool_lengths)),
            sources: Rc::new((0..total).collect()),
            weights: Tensor::new(total, 1, pool_weights).expect("one weight per row"),
        },
        lap_norm: Rc::new(CsrMatrix::from_triplets(total, total, lap)),
        lap_down_norm: Rc::new(CsrMatrix::from_triplets(total, total, lap_down)),
        lap_up_norm: Rc::new(CsrMatrix::from_triplets(total, total, lap_up)),
        from_below: (k > 0).then(|| {
            Rc::new(CsrMatrix::from_triplets(total, total_below, from_below))
        }),
        from_above: Some(Rc::new(CsrMatrix::from_triplets(
            total,
            total_above,
            from_above,
        ))),
        gcn_adjacency: (k == 0).then(|| Rc::new(CsrMatrix::from_triplets(total, total, gcn))),
    };
    let inputs = Tensor::new(total, width, stacked).expect("stacked rows match counts");
    Ok((structure, inputs))
}

/// Symmetric degree normalization D^{-1/2} M D^{-1/2} with degrees
/// d_i = max(1, sum_j |m_ij|).
fn append_sym_norm(m: &IntSparseMatrix, offset: usize, out: &mut Vec<(usize, usize, f64)>) {
    let mut deg = vec![0i64; m.rows()];
    for &(r, _, v) in m.entries() {
        deg[r] += v.abs();
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / ((d.max(1)) as f64).sqrt()).collect();
    for &(r, c, v) in m.entries() {
        out.push((offset + r, offset + c, v as f64 * inv_sqrt[r] * inv_sqrt[c]));
    }
}

/// Normalized absolute boundary map: entries |b_ij| scaled by the inverse
/// square roots of the absolute row and column sums (clamped below by 1).
/// With `transpose` the roles of rows and columns swap, giving the map from
/// dimension k-1 up to k.
fn append_rect_abs_norm(
    b: &IntSparseMatrix,
    transpose: bool,
    row_offset: usize,
    col_offset: usize,
    out: &mut Vec<(usize, usize, f64)>,
) {
    let mut row_deg = vec![0i64; b.rows()];
    let mut col_deg = vec![0i64; b.cols()];
    for &(r, c, v) in b.entries() {
        row_deg[r] += v.abs();
        col_deg[c] += v.abs();
    }
    let row_inv: Vec<f64> = row_deg.iter().map(|&d| 1.0 / ((d.max(1)) as f64).sqrt()).collect();
    let col_inv: Vec<f64> = col_deg.iter().map(|&d| 1.0 / ((d.max(1)) as f64).sqrt()).collect();
    for &(r, c, v) in b.entries() {
        let value = v.abs() as f64 * row_inv[r] * col_inv[c];
        if transpose {
            out.push((row_offset + c, col_offset + r, value));
        } else {
            out.push((row_offset + r, col_offset + c, value));
        }
    }
}

/// Symmetric-normalized adjacency with self-loops: D^{-1/2} (A + I) D^{-1/2}
/// where A is the vertex adjacency and D the degrees of A + I.
fn append_gcn_norm(c: &SimplicialComplex, offset: usize, out: &mut Vec<(usize, usize, f64)>) {
    let n = c.num_simplices(0);
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in c.simplices(1) {
        let v = s.vertices();
        neighbors[v[0]].push(v[1]);
        neighbors[v[1]].push(v[0]);
    }
    let deg: Vec<f64> = neighbors.iter().map(|adj| (adj.len() + 1) as f64).collect();
    for i in 0..n {
        out.push((offset + i, offset + i, 1.0 / deg[i]));
        for &j in &neighbors[i] {
            out.push((offset + i, offset + j, 1.0 / (deg[i] * deg[j]).sqrt()));
        }
    }
}
