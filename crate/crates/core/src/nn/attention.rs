//! Orientation-aware attention over one neighborhood of a simplicial
//! complex. The same code path serves every attention layer in the crate;
//! the graph-attention baseline is the dimension-0 unsigned special case.

use std::rc::Rc;

use crate::complex::NeighborhoodTable;
use crate::nn::{FlatAdjacency, NnError};
use crate::tensor::{Graph, Tensor, Var};

const LEAKY_SLOPE: f64 = 0.01;

/// One attention head's projection and scoring parameters, as graph
/// variables bound for the current forward pass.
#[derive(Clone, Copy)]
pub struct AttentionHead {
    /// in x out projection.
    pub weight: Var,
    /// out x 1 score vector applied to the target simplex.
    pub a_target: Var,
    /// out x 1 score vector applied to the source simplex.
    pub a_source: Var,
}

/// Attention-weighted messages over one adjacency.
///
/// Scores are LeakyReLU(a_target . u_sigma + a_source . u_tau) where u is
/// the projected feature Wh, or |Wh| when `signed` is set so that the score
/// is even under orientation flips. The softmax runs per target segment and
/// the result is multiplied by the relative orientation sign, making the
/// coefficients odd where the scores are even.
///
/// Returns the aggregated messages (n x out) and the signed coefficients
/// (one per adjacency entry).
pub fn attention_messages(
    g: &mut Graph,
    h: Var,
    head: AttentionHead,
    adj: &FlatAdjacency,
) -> Result<(Var, Var), NnError> {
    let projected = g.matmul(h, head.weight)?;
    let signed = adj.signs.is_some();
    let basis = if signed { g.abs(projected) } else { projected };
    let target_score = g.matmul(basis, head.a_target)?;
    let source_score = g.matmul(basis, head.a_source)?;
    let per_target = g.row_gather(target_score, Rc::clone(&adj.targets))?;
    let per_source = g.row_gather(source_score, Rc::clone(&adj.sources))?;
    let raw = g.add(per_target, per_source)?;
    let scores = g.leaky_relu(raw, LEAKY_SLOPE);
    let weights = g.segment_softmax(scores, Rc::clone(&adj.seg))?;
    let coefficients = match &adj.signs {
        Some(signs) => {
            let signs = g.input(signs.clone());
            g.mul(weights, signs)?
        }
        None => weights,
    };
    let messages = g.segment_weighted_sum(
        coefficients,
        projected,
        Rc::clone(&adj.sources),
        Rc::clone(&adj.seg),
    )?;
    Ok((messages, coefficients))
}

/// Attention coefficients for every (target, source) pair of one
/// dimension's upper and lower neighborhoods, in neighborhood list order.
#[derive(Clone, Debug)]
pub struct AttentionCoefficients {
    pub up: Vec<Vec<AttentionEntry>>,
    pub down: Vec<Vec<AttentionEntry>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttentionEntry {
    pub source: usize,
    pub alpha: f64,
}

/// Raw parameter matrices for inspecting one head's attention pattern.
pub struct AttentionHeadParams<'a> {
    pub weight: &'a Tensor,
    pub a_target: &'a Tensor,
    pub a_source: &'a Tensor,
}

/// Computes the attention coefficients one head assigns over a
/// neighborhood table, without aggregating messages. `signed` switches the
/// even scoring basis |Wh| on and keeps the orientation signs; the
/// unsigned mode scores Wh directly over sign-stripped neighborhoods.
pub fn sat_attention(
    features: &Tensor,
    table: &NeighborhoodTable,
    up: AttentionHeadParams,
    down: AttentionHeadParams,
    signed: bool,
) -> Result<AttentionCoefficients, NnError> {
    let table = if signed { table.clone() } else { table.to_unsigned() };
    let mut g = Graph::new();
    let h = g.input(features.clone());
    let up_alpha = side_coefficients(&mut g, h, up, &table.up, signed)?;
    let down_alpha = side_coefficients(&mut g, h, down, &table.down, signed)?;
    Ok(AttentionCoefficients {
        up: split_entries(&table.up, &up_alpha),
        down: split_entries(&table.down, &down_alpha),
    })
}

fn side_coefficients(
    g: &mut Graph,
    h: Var,
    params: AttentionHeadParams,
    lists: &[Vec<crate::complex::Neighbor>],
    signed: bool,
) -> Result<Vec<f64>, NnError> {
    let adj = flatten_lists(lists, signed);
    let head = AttentionHead {
        weight: g.input(params.weight.clone()),
        a_target: g.input(params.a_target.clone()),
        a_source: g.input(params.a_source.clone()),
    };
    let (_, coefficients) = attention_messages(g, h, head, &adj)?;
    Ok(g.value(coefficients).to_vec())
}

fn flatten_lists(lists: &[Vec<crate::complex::Neighbor>], signed: bool) -> FlatAdjacency {
    let mut lengths = Vec::with_capacity(lists.len());
    let mut targets = Vec::new();
    let mut sources = Vec::new();
    let mut signs = Vec::new();
    for (target, list) in lists.iter().enumerate() {
        lengths.push(list.len());
        for nb in list {
            targets.push(target);
            sources.push(nb.index);
            signs.push(nb.sign);
        }
    }
    FlatAdjacency {
        seg: Rc::new(crate::tensor::SegmentIndex::from_lengths(&lengths)),
        targets: Rc::new(targets),
        sources: Rc::new(sources),
        signs: signed.then(|| {
            let n = signs.len();
            Tensor::new(n, 1, signs).expect("one sign per entry")
        }),
    }
}

fn split_entries(
    lists: &[Vec<crate::complex::Neighbor>],
    alpha: &[f64],
) -> Vec<Vec<AttentionEntry>> {
    let mut out = Vec::with_capacity(lists.len());
    let mut cursor = 0;
    for list in lists {
        let mut entries = Vec::with_capacity(list.len());
        for nb in list {
            entries.push(AttentionEntry {
                source: nb.index,
                alpha: alpha[cursor],
            });
            cursor += 1;
        }
        out.push(entries);
    }
    debug_assert_eq!(cursor, alpha.len());
    out
}
