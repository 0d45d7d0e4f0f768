use super::{ComplexError, SimplicialComplex};
use crate::sparse::IntSparseMatrix;

/// One adjacent simplex together with its relative orientation sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub sign: f64,
}

/// Upper and lower adjacency lists for the simplices of one dimension.
///
/// Each simplex appears in its own lists with sign +1; other entries carry
/// the relative orientation, defined as the sign of the corresponding
/// off-diagonal entry of `-L_up` (upper) or `-L_down` (lower). Pairs whose
/// Laplacian entry is zero are not adjacent. Lists are in ascending index
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodTable {
    pub dim: usize,
    pub up: Vec<Vec<Neighbor>>,
    pub down: Vec<Vec<Neighbor>>,
}

impl NeighborhoodTable {
    /// Forgets orientation information, forcing every sign to +1. Used for
    /// complexes treated as unoriented.
    pub fn to_unsigned(&self) -> Self {
        let strip = |lists: &[Vec<Neighbor>]| {
            lists
                .iter()
                .map(|list| {
                    list.iter()
                        .map(|nb| Neighbor {
                            index: nb.index,
                            sign: 1.0,
                        })
                        .collect()
                })
                .collect()
        };
        Self {
            dim: self.dim,
            up: strip(&self.up),
            down: strip(&self.down),
        }
    }
}

impl SimplicialComplex {
    /// Computes upper and lower adjacency of the k-simplices with relative
    /// orientation signs read off the Hodge Laplacian parts.
    pub fn neighborhoods(&self, k: usize) -> Result<NeighborhoodTable, ComplexError> {
        let lap = self.hodge_laplacian(k)?;
        let n = self.num_simplices(k);
        Ok(NeighborhoodTable {
            dim: k,
            up: adjacency_lists(&lap.up, n),
            down: adjacency_lists(&lap.down, n),
        })
    }
}

fn adjacency_lists(laplacian: &IntSparseMatrix, n: usize) -> Vec<Vec<Neighbor>> {
    let mut lists: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
    for &(r, c, v) in laplacian.entries() {
        if r != c {
            lists[r].push(Neighbor {
                index: c,
                sign: if v < 0 { 1.0 } else { -1.0 },
            });
        }
    }
    for (r, list) in lists.iter_mut().enumerate() {
        let pos = list.partition_point(|nb| nb.index < r);
        list.insert(pos, Neighbor { index: r, sign: 1.0 });
    }
    lists
}
