//! Simplicial complexes, boundary operators and Hodge Laplacians.
//!
//! A complex stores its simplices per dimension in lexicographic vertex
//! order; that ordering fixes the row and column indices of every boundary
//! matrix. Orientation is canonical (ascending vertex ids), and
//! [`OrientationFlip`] expresses any other orientation choice as a diagonal
//! change of basis.

mod flip;
mod graph;
mod neighborhood;
mod simplex;
mod text;

pub use flip::{apply_flip, OrientationFlip};
pub use graph::UndirectedGraph;
pub use neighborhood::{Neighbor, NeighborhoodTable};
pub use simplex::Simplex;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::sparse::IntSparseMatrix;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("simplex has no vertices")]
    EmptySimplex,
    #[error("duplicate vertex {0} in simplex")]
    DuplicateVertex(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for graph with {n_vertices} vertices")]
    VertexOutOfRange { vertex: usize, n_vertices: usize },
    #[error("dimension {k} out of range for complex of max dimension {max_dim}")]
    DimOutOfRange { k: usize, max_dim: usize },
    #[error("flip over dimension {dim} has {got} signs but the complex has {expected} simplices there")]
    FlipLengthMismatch { dim: usize, got: usize, expected: usize },
    #[error("invalid flip sign {0} (must be +1 or -1)")]
    InvalidFlipSign(i8),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite simplicial complex with integer boundary matrices.
///
/// `B_k` maps k-chains to (k-1)-chains; rows are indexed by the
/// (k-1)-simplices and columns by the k-simplices, both in lexicographic
/// order. Every column holds the alternating face signs of one simplex, so
/// it has exactly k+1 nonzeros in {-1, +1}.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    boundary: Vec<IntSparseMatrix>,
}

/// The pieces of the k-th Hodge Laplacian.
///
/// `down` is `B_kᵀ B_k`, `up` is `B_{k+1} B_{k+1}ᵀ` and `full` is their sum.
#[derive(Clone, Debug)]
pub struct HodgeLaplacian {
    pub full: IntSparseMatrix,
    pub down: IntSparseMatrix,
    pub up: IntSparseMatrix,
}

impl SimplicialComplex {
    /// Builds the complex generated by the given simplices: every face of
    /// every generator is added so the result is closed, then boundary
    /// matrices are assembled.
    pub fn from_simplices(generators: Vec<Simplex>) -> Self {
        let mut levels: Vec<BTreeSet<Simplex>> = Vec::new();
        let mut stack = generators;
        while let Some(s) = stack.pop() {
            let d = s.dim();
            if levels.len() <= d {
                levels.resize_with(d + 1, BTreeSet::new);
            }
            if levels[d].insert(s.clone()) && d > 0 {
                for (face, _) in s.boundary_faces() {
                    stack.push(face);
                }
            }
        }
        let levels = levels
            .into_iter()
            .map(|level| level.into_iter().collect())
            .collect();
        Self::from_levels(levels)
    }

    /// Assembles a complex from per-dimension simplex lists that are already
    /// closed, deduplicated and lexicographically sorted.
    fn from_levels(simplices: Vec<Vec<Simplex>>) -> Self {
        debug_assert!(simplices
            .iter()
            .all(|level| level.windows(2).all(|w| w[0] < w[1])));
        debug_assert!(simplices.iter().all(|level| !level.is_empty()));
        let index: Vec<HashMap<Simplex, usize>> = simplices
            .iter()
            .map(|level| {
                level
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i))
                    .collect()
            })
            .collect();
        let mut boundary = Vec::new();
        for k in 1..simplices.len() {
            let mut triplets = Vec::new();
            for (col, s) in simplices[k].iter().enumerate() {
                for (face, sign) in s.boundary_faces() {
                    let row = index[k - 1][&face];
                    triplets.push((row, col, sign));
                }
            }
            boundary.push(IntSparseMatrix::from_triplets(
                simplices[k - 1].len(),
                simplices[k].len(),
                triplets,
            ));
        }
        Self {
            simplices,
            index,
            boundary,
        }
    }

    /// Highest dimension carrying at least one simplex (0 for an empty
    /// complex).
    pub fn max_dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn num_simplices(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn total_simplices(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    /// The k-simplices in index order (empty slice above `max_dim`).
    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn simplex_index(&self, k: usize, s: &Simplex) -> Option<usize> {
        self.index.get(k)?.get(s).copied()
    }

    /// The boundary matrix `B_k`, defined for 1 <= k <= max_dim.
    pub fn boundary_matrix(&self, k: usize) -> Result<&IntSparseMatrix, ComplexError> {
        if k == 0 || k > self.max_dim() {
            return Err(ComplexError::DimOutOfRange {
                k,
                max_dim: self.max_dim(),
            });
        }
        Ok(&self.boundary[k - 1])
    }

    /// Computes `L_k = B_kᵀ B_k + B_{k+1} B_{k+1}ᵀ` along with the two
    /// summands. `B_0` is treated as empty, and so is `B_{k+1}` when the
    /// complex has nothing above dimension k.
    pub fn hodge_laplacian(&self, k: usize) -> Result<HodgeLaplacian, ComplexError> {
        if k > self.max_dim() {
            return Err(ComplexError::DimOutOfRange {
                k,
                max_dim: self.max_dim(),
            });
        }
        let n = self.num_simplices(k);
        let down = if k == 0 {
            IntSparseMatrix::zeros(n, n)
        } else {
            let b = &self.boundary[k - 1];
            b.transpose().matmul(b)
        };
        let up = if k < self.max_dim() {
            let b = &self.boundary[k];
            b.matmul(&b.transpose())
        } else {
            IntSparseMatrix::zeros(n, n)
        };
        let full = down.add(&up);
        Ok(HodgeLaplacian { full, down, up })
    }
}

/// Builds the clique complex of a simple graph up to `max_dim`: the
/// k-simplices are exactly the (k+1)-cliques of the graph.
pub fn build_clique_complex(graph: &UndirectedGraph, max_dim: usize) -> SimplicialComplex {
    let mut levels: Vec<Vec<Simplex>> = Vec::new();
    let mut current: Vec<Vec<usize>> = (0..graph.n_vertices()).map(|v| vec![v]).collect();
    for dim in 0..=max_dim {
        if current.is_empty() {
            break;
        }
        levels.push(current.iter().cloned().map(Simplex::from_sorted).collect());
        if dim == max_dim {
            break;
        }
        let mut next = Vec::new();
        for clique in &current {
            let last = *clique.last().expect("cliques are non-empty");
            for &v in graph.neighbors(last) {
                if v > last && clique[..clique.len() - 1]
                    .iter()
                    .all(|&u| graph.are_adjacent(u, v))
                {
                    let mut extended = clique.clone();
                    extended.push(v);
                    next.push(extended);
                }
            }
        }
        current = next;
    }
    SimplicialComplex::from_levels(levels)
}
