use super::ComplexError;

/// A single simplex stored as strictly increasing vertex ids.
///
/// The ascending order doubles as the canonical orientation; every boundary
/// sign in this crate is taken relative to it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<usize>,
}

impl Simplex {
    /// Builds a simplex from vertex ids in any order, sorting them into the
    /// canonical form. Duplicate ids are rejected.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateVertex(w[0]));
        }
        Ok(Self { vertices })
    }

    pub fn vertex(v: usize) -> Self {
        Self { vertices: vec![v] }
    }

    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// The faces obtained by deleting one vertex, each paired with the
    /// alternating boundary sign (-1)^i of the deleted position. Empty for
    /// vertices.
    pub fn boundary_faces(&self) -> impl Iterator<Item = (Simplex, i64)> + '_ {
        let count = if self.vertices.len() > 1 {
            self.vertices.len()
        } else {
            0
        };
        (0..count).map(move |i| {
            let mut v = self.vertices.clone();
            v.remove(i);
            let sign = if i % 2 == 0 { 1 } else { -1 };
            (Simplex { vertices: v }, sign)
        })
    }
}
