use rand::Rng;

use super::{ComplexError, SimplicialComplex};
use crate::nn::CochainFeatures;

/// A per-simplex choice of sign for one dimension, representing the diagonal
/// matrix T of an orientation change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationFlip {
    dim: usize,
    signs: Vec<i8>,
}

impl OrientationFlip {
    pub fn new(dim: usize, signs: Vec<i8>) -> Result<Self, ComplexError> {
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(ComplexError::InvalidFlipSign(bad));
        }
        Ok(Self { dim, signs })
    }

    pub fn identity(dim: usize, len: usize) -> Self {
        Self {
            dim,
            signs: vec![1; len],
        }
    }

    /// Samples a flip with independent uniform ±1 signs.
    pub fn random<R: Rng + ?Sized>(dim: usize, len: usize, rng: &mut R) -> Self {
        Self {
            dim,
            signs: (0..len).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }
}

impl SimplicialComplex {
    /// Re-orients the simplices of `flip.dim()` by T: `B_k` becomes `B_k T`
    /// and `B_{k+1}` becomes `T B_{k+1}`. Simplex lists stay untouched; only
    /// boundary signs move.
    pub fn apply_flip(&self, flip: &OrientationFlip) -> Result<SimplicialComplex, ComplexError> {
        let k = flip.dim();
        let n = self.num_simplices(k);
        if flip.len() != n {
            return Err(ComplexError::FlipLengthMismatch {
                dim: k,
                got: flip.len(),
                expected: n,
            });
        }
        let mut out = self.clone();
        if k >= 1 && k <= self.max_dim() {
            out.boundary[k - 1] = self.boundary[k - 1].scale_cols(flip.signs());
        }
        if k < self.max_dim() {
            out.boundary[k] = self.boundary[k].scale_rows(flip.signs());
        }
        Ok(out)
    }
}

/// Applies one flip to a complex and the matching cochain features: boundary
/// matrices transform as `B_k T` and `T B_{k+1}`, and the dimension-k feature
/// rows are re-signed by T.
pub fn apply_flip(
    complex: &SimplicialComplex,
    flip: &OrientationFlip,
    features: &CochainFeatures,
) -> Result<(SimplicialComplex, CochainFeatures), ComplexError> {
    let flipped = complex.apply_flip(flip)?;
    let features = features.apply_flip(flip)?;
    Ok((flipped, features))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_clique_complex, UndirectedGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle_complex() -> SimplicialComplex {
        let g = UndirectedGraph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        build_clique_complex(&g, 2)
    }

    fn conjugate_by_signs(dense: &[Vec<i64>], signs: &[i8]) -> Vec<Vec<i64>> {
        dense
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| v * signs[i] as i64 * signs[j] as i64)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_flip_is_a_no_op() {
        let c = triangle_complex();
        let flip = OrientationFlip::identity(1, 3);
        assert!(flip.is_identity());
        assert_eq!(c.apply_flip(&flip).unwrap(), c);
    }

    #[test]
    fn all_negative_flip_is_an_involution() {
        let c = triangle_complex();
        let flip = OrientationFlip::new(1, vec![-1, -1, -1]).unwrap();
        let once = c.apply_flip(&flip).unwrap();
        assert_ne!(once, c);
        let twice = once.apply_flip(&flip).unwrap();
        assert_eq!(twice, c);
    }

    #[test]
    fn laplacian_transforms_by_conjugation() {
        let c = triangle_complex();
        let signs = vec![1, -1, 1];
        let flip = OrientationFlip::new(1, signs.clone()).unwrap();
        let flipped = c.apply_flip(&flip).unwrap();
        let before = c.hodge_laplacian(1).unwrap();
        let after = flipped.hodge_laplacian(1).unwrap();
        assert_eq!(
            after.full.to_dense(),
            conjugate_by_signs(&before.full.to_dense(), &signs)
        );
        assert_eq!(
            after.up.to_dense(),
            conjugate_by_signs(&before.up.to_dense(), &signs)
        );
    }

    #[test]
    fn flip_preserves_boundary_support() {
        let c = triangle_complex();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let flip = OrientationFlip::random(1, 3, &mut rng);
        let flipped = c.apply_flip(&flip).unwrap();
        for k in 1..=2 {
            let before = c.boundary_matrix(k).unwrap();
            let after = flipped.boundary_matrix(k).unwrap();
            assert_eq!(before.col_abs_sums(), after.col_abs_sums());
        }
    }

    #[test]
    fn rejects_bad_flips() {
        let c = triangle_complex();
        assert!(matches!(
            OrientationFlip::new(1, vec![1, 0, 1]),
            Err(ComplexError::InvalidFlipSign(0))
        ));
        let short = OrientationFlip::identity(1, 2);
        assert!(matches!(
            c.apply_flip(&short),
            Err(ComplexError::FlipLengthMismatch { .. })
        ));
    }
}
