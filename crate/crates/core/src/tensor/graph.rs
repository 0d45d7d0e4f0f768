use std::ops::Range;
use std::rc::Rc;

use super::dense::{gemm_acc, Tensor};
use super::TensorError;
use crate::sparse::CsrMatrix;

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// Groups a flat list of entries into consecutive segments, one per output
/// row. Offsets have length `n_segments + 1`, start at 0 and end at the
/// total entry count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentIndex {
    offsets: Vec<usize>,
}

impl SegmentIndex {
    pub fn from_offsets(offsets: Vec<usize>) -> Result<Self, TensorError> {
        if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(TensorError::BadSegmentOffsets);
        }
        Ok(Self { offsets })
    }

    pub fn from_lengths(lengths: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(lengths.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &l in lengths {
            acc += l;
            offsets.push(acc);
        }
        Self { offsets }
    }

    pub fn n_segments(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_entries(&self) -> usize {
        *self.offsets.last().expect("offsets are never empty")
    }

    pub fn range(&self, segment: usize) -> Range<usize> {
        self.offsets[segment]..self.offsets[segment + 1]
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.offsets.windows(2).map(|w| w[0]..w[1])
    }

    pub fn first_empty(&self) -> Option<usize> {
        self.ranges().position(|r| r.is_empty())
    }
}

enum Op {
    Leaf,
    Matmul { a: Var, b: Var },
    SparseMatmul { m: Rc<CsrMatrix>, x: Var },
    Add { a: Var, b: Var },
    AddBias { a: Var, bias: Var },
    Mul { a: Var, b: Var },
    Scale { x: Var, c: f64 },
    ConcatColumns { parts: Vec<Var> },
    RowGather { x: Var, idx: Rc<Vec<usize>> },
    SegmentSoftmax { scores: Var, seg: Rc<SegmentIndex> },
    SegmentWeightedSum {
        weights: Var,
        x: Var,
        sources: Rc<Vec<usize>>,
        seg: Rc<SegmentIndex>,
    },
    MeanRows { x: Var },
    MeanAll { x: Var },
    Sum { x: Var },
    Abs { x: Var },
    Relu { x: Var },
    LeakyRelu { x: Var, slope: f64 },
    Tanh { x: Var },
    Identity { x: Var },
    LogSoftmaxRows { x: Var },
    PickPerRow { x: Var, labels: Rc<Vec<usize>> },
}

struct Node {
    op: Op,
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    grad: Vec<f64>,
}

/// An arena of computation nodes supporting reverse-mode differentiation.
///
/// Nodes are created in topological order by construction; `backward` walks
/// them in reverse and accumulates gradients into every reachable node, so
/// repeated backward calls without `zero_grads` add up.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, op: Op, rows: usize, cols: usize, value: Vec<f64>) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        let grad = vec![0.0; value.len()];
        self.nodes.push(Node {
            op,
            rows,
            cols,
            value,
            grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Registers a leaf holding the given values.
    pub fn input(&mut self, t: Tensor) -> Var {
        let (rows, cols) = t.shape();
        let value = t.into_data();
        self.push(Op::Leaf, rows, cols, value)
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = &self.nodes[v.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn tensor(&self, v: Var) -> Tensor {
        let n = &self.nodes[v.0];
        Tensor::new(n.rows, n.cols, n.value.clone()).expect("node shapes are consistent")
    }

    pub fn grad_slice(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].grad
    }

    pub fn grad(&self, v: Var) -> Tensor {
        let n = &self.nodes[v.0];
        Tensor::new(n.rows, n.cols, n.grad.clone()).expect("node shapes are consistent")
    }

    pub fn zero_grads(&mut self) {
        for n in &mut self.nodes {
            n.grad.fill(0.0);
        }
    }

    fn expect_shape(
        &self,
        op: &'static str,
        v: Var,
        rows: usize,
        cols: usize,
    ) -> Result<(), TensorError> {
        if self.shape(v) != (rows, cols) {
            return Err(TensorError::ShapeMismatch {
                op,
                lhs: (rows, cols),
                rhs: self.shape(v),
            });
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (m, ka) = self.shape(a);
        let (kb, n) = self.shape(b);
        if ka != kb {
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                lhs: (m, ka),
                rhs: (kb, n),
            });
        }
        let mut value = vec![0.0; m * n];
        gemm_acc(
            m,
            ka,
            n,
            &self.nodes[a.0].value,
            ka as isize,
            1,
            &self.nodes[b.0].value,
            n as isize,
            1,
            0.0,
            &mut value,
        );
        Ok(self.push(Op::Matmul { a, b }, m, n, value))
    }

    /// Multiplies a constant sparse matrix by a dense node: `m · x`.
    pub fn sparse_matmul(&mut self, m: Rc<CsrMatrix>, x: Var) -> Result<Var, TensorError> {
        let (xr, xc) = self.shape(x);
        if m.cols() != xr {
            return Err(TensorError::ShapeMismatch {
                op: "sparse_matmul",
                lhs: (m.rows(), m.cols()),
                rhs: (xr, xc),
            });
        }
        let mut value = vec![0.0; m.rows() * xc];
        m.mul_dense(&self.nodes[x.0].value, xc, &mut value);
        let rows = m.rows();
        Ok(self.push(Op::SparseMatmul { m, x }, rows, xc, value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (r, c) = self.shape(a);
        self.expect_shape("add", b, r, c)?;
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x + y)
            .collect();
        Ok(self.push(Op::Add { a, b }, r, c, value))
    }

    /// Adds a 1xC bias row to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var, TensorError> {
        let (r, c) = self.shape(a);
        self.expect_shape("add_bias", bias, 1, c)?;
        let bias_row = self.nodes[bias.0].value.clone();
        let mut value = self.nodes[a.0].value.clone();
        for row in value.chunks_mut(c.max(1)) {
            for (v, b) in row.iter_mut().zip(&bias_row) {
                *v += b;
            }
        }
        Ok(self.push(Op::AddBias { a, bias }, r, c, value))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (r, c) = self.shape(a);
        self.expect_shape("mul", b, r, c)?;
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x * y)
            .collect();
        Ok(self.push(Op::Mul { a, b }, r, c, value))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let (rows, cols) = self.shape(x);
        let value = self.nodes[x.0].value.iter().map(|v| v * c).collect();
        self.push(Op::Scale { x, c }, rows, cols, value)
    }

    pub fn concat_columns(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        assert!(!parts.is_empty(), "concat_columns needs at least one part");
        let rows = self.shape(parts[0]).0;
        let mut cols = 0;
        for &p in parts {
            let (r, c) = self.shape(p);
            if r != rows {
                return Err(TensorError::ShapeMismatch {
                    op: "concat_columns",
                    lhs: (rows, cols),
                    rhs: (r, c),
                });
            }
            cols += c;
        }
        let mut value = vec![0.0; rows * cols];
        let mut offset = 0;
        for &p in parts {
            let pc = self.shape(p).1;
            let pv = &self.nodes[p.0].value;
            for r in 0..rows {
                value[r * cols + offset..r * cols + offset + pc]
                    .copy_from_slice(&pv[r * pc..(r + 1) * pc]);
            }
            offset += pc;
        }
        Ok(self.push(
            Op::ConcatColumns {
                parts: parts.to_vec(),
            },
            rows,
            cols,
            value,
        ))
    }

    /// Stacks the rows `idx` of `x`, in order and possibly with repeats.
    pub fn row_gather(&mut self, x: Var, idx: Rc<Vec<usize>>) -> Result<Var, TensorError> {
        let (xr, c) = self.shape(x);
        if let Some(&bad) = idx.iter().find(|&&i| i >= xr) {
            return Err(TensorError::ShapeMismatch {
                op: "row_gather",
                lhs: (xr, c),
                rhs: (bad, 0),
            });
        }
        let xv = &self.nodes[x.0].value;
        let mut value = vec![0.0; idx.len() * c];
        for (e, &src) in idx.iter().enumerate() {
            value[e * c..(e + 1) * c].copy_from_slice(&xv[src * c..(src + 1) * c]);
        }
        let rows = idx.len();
        Ok(self.push(Op::RowGather { x, idx }, rows, c, value))
    }

    /// Softmax within each segment of a column of scores; outputs per-entry
    /// weights that sum to 1 inside every segment.
    pub fn segment_softmax(
        &mut self,
        scores: Var,
        seg: Rc<SegmentIndex>,
    ) -> Result<Var, TensorError> {
        let (e, c) = self.shape(scores);
        if c != 1 {
            return Err(TensorError::ShapeMismatch {
                op: "segment_softmax",
                lhs: (e, 1),
                rhs: (e, c),
            });
        }
        if seg.n_entries() != e {
            return Err(TensorError::SegmentCoverage {
                op: "segment_softmax",
                expected: e,
                got: seg.n_entries(),
            });
        }
        if let Some(s) = seg.first_empty() {
            return Err(TensorError::EmptySegment(s));
        }
        let sv = &self.nodes[scores.0].value;
        let mut value = vec![0.0; e];
        for range in seg.ranges() {
            let max = sv[range.clone()].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for i in range.clone() {
                let w = (sv[i] - max).exp();
                value[i] = w;
                total += w;
            }
            for i in range {
                value[i] /= total;
            }
        }
        Ok(self.push(Op::SegmentSoftmax { scores, seg }, e, 1, value))
    }

    /// For each segment s, sums `weights[e] * x[sources[e], :]` over the
    /// segment's entries into output row s.
    pub fn segment_weighted_sum(
        &mut self,
        weights: Var,
        x: Var,
        sources: Rc<Vec<usize>>,
        seg: Rc<SegmentIndex>,
    ) -> Result<Var, TensorError> {
        let (e, wc) = self.shape(weights);
        if wc != 1 {
            return Err(TensorError::ShapeMismatch {
                op: "segment_weighted_sum",
                lhs: (e, 1),
                rhs: (e, wc),
            });
        }
        if seg.n_entries() != e || sources.len() != e {
            return Err(TensorError::SegmentCoverage {
                op: "segment_weighted_sum",
                expected: e,
                got: seg.n_entries().min(sources.len()),
            });
        }
        let (xr, c) = self.shape(x);
        if let Some(&bad) = sources.iter().find(|&&i| i >= xr) {
            return Err(TensorError::ShapeMismatch {
                op: "segment_weighted_sum",
                lhs: (xr, c),
                rhs: (bad, 0),
            });
        }
        let wv = &self.nodes[weights.0].value;
        let xv = &self.nodes[x.0].value;
        let rows = seg.n_segments();
        let mut value = vec![0.0; rows * c];
        for (s, range) in seg.ranges().enumerate() {
            let out = s * c;
            for i in range {
                let w = wv[i];
                let src = sources[i] * c;
                for j in 0..c {
                    value[out + j] += w * xv[src + j];
                }
            }
        }
        Ok(self.push(
            Op::SegmentWeightedSum {
                weights,
                x,
                sources,
                seg,
            },
            rows,
            c,
            value,
        ))
    }

    /// Mean over all rows, giving a 1xC tensor. Zero rows give zeros.
    pub fn mean_rows(&mut self, x: Var) -> Var {
        let (r, c) = self.shape(x);
        let xv = &self.nodes[x.0].value;
        let mut value = vec![0.0; c];
        if r > 0 {
            for row in xv.chunks(c.max(1)) {
                for (acc, v) in value.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            for acc in &mut value {
                *acc /= r as f64;
            }
        }
        self.push(Op::MeanRows { x }, 1, c, value)
    }

    /// Mean of every entry, as a scalar.
    pub fn mean_all(&mut self, x: Var) -> Var {
        let xv = &self.nodes[x.0].value;
        let n = xv.len();
        let value = if n == 0 {
            0.0
        } else {
            xv.iter().sum::<f64>() / n as f64
        };
        self.push(Op::MeanAll { x }, 1, 1, vec![value])
    }

    /// Sum of every entry, as a scalar.
    pub fn sum(&mut self, x: Var) -> Var {
        let value = self.nodes[x.0].value.iter().sum();
        self.push(Op::Sum { x }, 1, 1, vec![value])
    }

    pub fn abs(&mut self, x: Var) -> Var {
        self.unary(x, |v| v.abs(), |x| Op::Abs { x })
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, |v| v.max(0.0), |x| Op::Relu { x })
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        self.unary(
            x,
            move |v| if v > 0.0 { v } else { slope * v },
            move |x| Op::LeakyRelu { x, slope },
        )
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, f64::tanh, |x| Op::Tanh { x })
    }

    pub fn identity(&mut self, x: Var) -> Var {
        self.unary(x, |v| v, |x| Op::Identity { x })
    }

    fn unary(
        &mut self,
        x: Var,
        f: impl Fn(f64) -> f64,
        op: impl FnOnce(Var) -> Op,
    ) -> Var {
        let (r, c) = self.shape(x);
        let value = self.nodes[x.0].value.iter().map(|&v| f(v)).collect();
        self.push(op(x), r, c, value)
    }

    /// Row-wise log-softmax, computed with max subtraction for stability.
    pub fn log_softmax_rows(&mut self, x: Var) -> Var {
        let (r, c) = self.shape(x);
        let xv = &self.nodes[x.0].value;
        let mut value = vec![0.0; r * c];
        for i in 0..r {
            let row = &xv[i * c..(i + 1) * c];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            for j in 0..c {
                value[i * c + j] = row[j] - lse;
            }
        }
        self.push(Op::LogSoftmaxRows { x }, r, c, value)
    }

    /// Picks one entry per row: output i is `x[i, labels[i]]`.
    pub fn pick_per_row(&mut self, x: Var, labels: Rc<Vec<usize>>) -> Result<Var, TensorError> {
        let (r, c) = self.shape(x);
        if labels.len() != r {
            return Err(TensorError::ShapeMismatch {
                op: "pick_per_row",
                lhs: (r, c),
                rhs: (labels.len(), 1),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
            return Err(TensorError::LabelOutOfRange {
                label: bad,
                classes: c,
            });
        }
        let xv = &self.nodes[x.0].value;
        let value = labels.iter().enumerate().map(|(i, &l)| xv[i * c + l]).collect();
        Ok(self.push(Op::PickPerRow { x, labels }, r, 1, value))
    }

    /// Mean negative log-likelihood of integer labels under row-wise softmax.
    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var, TensorError> {
        let (r, c) = self.shape(logits);
        if labels.len() != r {
            return Err(TensorError::ShapeMismatch {
                op: "cross_entropy",
                lhs: (r, c),
                rhs: (labels.len(), 1),
            });
        }
        let lsm = self.log_softmax_rows(logits);
        let picked = self.pick_per_row(lsm, Rc::new(labels.to_vec()))?;
        let mean = self.mean_all(picked);
        Ok(self.scale(mean, -1.0))
    }

    /// Accumulates d loss / d node into every node's gradient buffer.
    pub fn backward(&mut self, loss: Var) -> Result<(), TensorError> {
        let (lr, lc) = self.shape(loss);
        if (lr, lc) != (1, 1) {
            return Err(TensorError::NonScalarLoss { rows: lr, cols: lc });
        }
        let mut adj: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        adj[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let Some(out_adj) = adj[i].take() else {
                continue;
            };
            self.backprop(i, &out_adj, &mut adj);
            for (g, a) in self.nodes[i].grad.iter_mut().zip(&out_adj) {
                *g += a;
            }
        }
        Ok(())
    }

    fn backprop(&self, i: usize, out_adj: &[f64], adj: &mut [Option<Vec<f64>>]) {
        fn slot<'a>(adj: &'a mut [Option<Vec<f64>>], v: Var, len: usize) -> &'a mut [f64] {
            adj[v.0].get_or_insert_with(|| vec![0.0; len])
        }

        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::Matmul { a, b } => {
                let (m, k) = self.shape(*a);
                let n = self.shape(*b).1;
                let av = &self.nodes[a.0].value;
                let bv = &self.nodes[b.0].value;
                // dA += dC · Bᵀ
                gemm_acc(
                    m,
                    n,
                    k,
                    out_adj,
                    n as isize,
                    1,
                    bv,
                    1,
                    n as isize,
                    1.0,
                    slot(adj, *a, av.len()),
                );
                // dB += Aᵀ · dC
                gemm_acc(
                    k,
                    m,
                    n,
                    av,
                    1,
                    k as isize,
                    out_adj,
                    n as isize,
                    1,
                    1.0,
                    slot(adj, *b, bv.len()),
                );
            }
            Op::SparseMatmul { m, x } => {
                let xc = self.shape(*x).1;
                let len = self.nodes[x.0].value.len();
                m.tr_mul_dense_add(out_adj, xc, slot(adj, *x, len));
            }
            Op::Add { a, b } => {
                let len = out_adj.len();
                for (d, &o) in slot(adj, *a, len).iter_mut().zip(out_adj) {
                    *d += o;
                }
                for (d, &o) in slot(adj, *b, len).iter_mut().zip(out_adj) {
                    *d += o;
                }
            }
            Op::AddBias { a, bias } => {
                let len = out_adj.len();
                let c = node.cols;
                for (d, &o) in slot(adj, *a, len).iter_mut().zip(out_adj) {
                    *d += o;
                }
                let db = slot(adj, *bias, c);
                for row in out_adj.chunks(c.max(1)) {
                    for (d, &o) in db.iter_mut().zip(row) {
                        *d += o;
                    }
                }
            }
            Op::Mul { a, b } => {
                let av = &self.nodes[a.0].value;
                let bv = &self.nodes[b.0].value;
                {
                    let da = slot(adj, *a, av.len());
                    for ((d, &o), &bb) in da.iter_mut().zip(out_adj).zip(bv) {
                        *d += o * bb;
                    }
                }
                {
                    let db = slot(adj, *b, bv.len());
                    for ((d, &o), &aa) in db.iter_mut().zip(out_adj).zip(av) {
                        *d += o * aa;
                    }
                }
            }
            Op::Scale { x, c } => {
                let len = out_adj.len();
                for (d, &o) in slot(adj, *x, len).iter_mut().zip(out_adj) {
                    *d += c * o;
                }
            }
            Op::ConcatColumns { parts } => {
                let rows = node.rows;
                let cols = node.cols;
                let mut offset = 0;
                for &p in parts {
                    let pc = self.shape(p).1;
                    let dp = slot(adj, p, rows * pc);
                    for r in 0..rows {
                        let src = &out_adj[r * cols + offset..r * cols + offset + pc];
                        for (d, &o) in dp[r * pc..(r + 1) * pc].iter_mut().zip(src) {
                            *d += o;
                        }
                    }
                    offset += pc;
                }
            }
            Op::RowGather { x, idx } => {
                let c = node.cols;
                let len = self.nodes[x.0].value.len();
                let dx = slot(adj, *x, len);
                for (e, &src) in idx.iter().enumerate() {
                    for (d, &o) in dx[src * c..(src + 1) * c]
                        .iter_mut()
                        .zip(&out_adj[e * c..(e + 1) * c])
                    {
                        *d += o;
                    }
                }
            }
            Op::SegmentSoftmax { scores, seg } => {
                let w = &node.value;
                let ds = slot(adj, *scores, w.len());
                for range in seg.ranges() {
                    let dot: f64 = range.clone().map(|i| w[i] * out_adj[i]).sum();
                    for i in range {
                        ds[i] += w[i] * (out_adj[i] - dot);
                    }
                }
            }
            Op::SegmentWeightedSum {
                weights,
                x,
                sources,
                seg,
            } => {
                let c = node.cols;
                let wv = &self.nodes[weights.0].value;
                let xv = &self.nodes[x.0].value;
                {
                    let dw = slot(adj, *weights, wv.len());
                    for (s, range) in seg.ranges().enumerate() {
                        let og = &out_adj[s * c..(s + 1) * c];
                        for i in range {
                            let src = sources[i] * c;
                            dw[i] += og
                                .iter()
                                .zip(&xv[src..src + c])
                                .map(|(o, v)| o * v)
                                .sum::<f64>();
                        }
                    }
                }
                {
                    let dx = slot(adj, *x, xv.len());
                    for (s, range) in seg.ranges().enumerate() {
                        let og = &out_adj[s * c..(s + 1) * c];
                        for i in range {
                            let w = wv[i];
                            let src = sources[i] * c;
                            for (d, &o) in dx[src..src + c].iter_mut().zip(og) {
                                *d += w * o;
                            }
                        }
                    }
                }
            }
            Op::MeanRows { x } => {
                let (r, c) = self.shape(*x);
                if r > 0 {
                    let dx = slot(adj, *x, r * c);
                    let inv = 1.0 / r as f64;
                    for row in dx.chunks_mut(c.max(1)) {
                        for (d, &o) in row.iter_mut().zip(out_adj) {
                            *d += o * inv;
                        }
                    }
                }
            }
            Op::MeanAll { x } => {
                let len = self.nodes[x.0].value.len();
                if len > 0 {
                    let o = out_adj[0] / len as f64;
                    for d in slot(adj, *x, len) {
                        *d += o;
                    }
                }
            }
            Op::Sum { x } => {
                let len = self.nodes[x.0].value.len();
                let o = out_adj[0];
                for d in slot(adj, *x, len) {
                    *d += o;
                }
            }
            Op::Abs { x } => {
                let xv = &self.nodes[x.0].value;
                let dx = slot(adj, *x, xv.len());
                for ((d, &o), &v) in dx.iter_mut().zip(out_adj).zip(xv) {
                    *d += o * if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                }
            }
            Op::Relu { x } => {
                let xv = &self.nodes[x.0].value;
                let dx = slot(adj, *x, xv.len());
                for ((d, &o), &v) in dx.iter_mut().zip(out_adj).zip(xv) {
                    if v > 0.0 {
                        *d += o;
                    }
                }
            }
            Op::LeakyRelu { x, slope } => {
                let xv = &self.nodes[x.0].value;
                let dx = slot(adj, *x, xv.len());
                for ((d, &o), &v) in dx.iter_mut().zip(out_adj).zip(xv) {
                    *d += o * if v > 0.0 { 1.0 } else { *slope };
                }
            }
            Op::Tanh { x } => {
                let y = &node.value;
                let dx = slot(adj, *x, y.len());
                for ((d, &o), &t) in dx.iter_mut().zip(out_adj).zip(y) {
                    *d += o * (1.0 - t * t);
                }
            }
            Op::Identity { x } => {
                let len = out_adj.len();
                for (d, &o) in slot(adj, *x, len).iter_mut().zip(out_adj) {
                    *d += o;
                }
            }
            Op::LogSoftmaxRows { x } => {
                let (r, c) = self.shape(*x);
                let y = &node.value;
                let dx = slot(adj, *x, r * c);
                for i in 0..r {
                    let row_sum: f64 = out_adj[i * c..(i + 1) * c].iter().sum();
                    for j in 0..c {
                        let idx = i * c + j;
                        dx[idx] += out_adj[idx] - y[idx].exp() * row_sum;
                    }
                }
            }
            Op::PickPerRow { x, labels } => {
                let c = self.shape(*x).1;
                let len = self.nodes[x.0].value.len();
                let dx = slot(adj, *x, len);
                for (i, &l) in labels.iter().enumerate() {
                    dx[i * c + l] += out_adj[i];
                }
            }
        }
    }
}
