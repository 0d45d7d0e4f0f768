use super::ComplexError;

/// A simple undirected graph over vertices `0..n_vertices`.
///
/// Edges are normalized to `(min, max)` order and kept sorted; self-loops
/// and duplicate edges are rejected at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, ComplexError> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(ComplexError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if e.1 >= n_vertices {
                return Err(ComplexError::VertexOutOfRange {
                    vertex: e.1,
                    n_vertices,
                });
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut neighbors = vec![Vec::new(); n_vertices];
        for &(a, b) in &normalized {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n_vertices,
            edges: normalized,
            neighbors,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }
}
