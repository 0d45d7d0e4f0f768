use std::collections::BTreeMap;

use crate::complex::{ComplexError, OrientationFlip};
use crate::tensor::Tensor;

/// Per-dimension feature matrices: the dimension-k entry holds one row per
/// k-simplex, in the complex's index order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CochainFeatures {
    by_dim: BTreeMap<usize, Tensor>,
}

impl CochainFeatures {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dim: usize, features: Tensor) {
        self.by_dim.insert(dim, features);
    }

    pub fn get(&self, dim: usize) -> Option<&Tensor> {
        self.by_dim.get(&dim)
    }

    pub fn dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_dim.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Tensor)> {
        self.by_dim.iter().map(|(&d, t)| (d, t))
    }

    /// Re-signs the rows of the dimension-k features by the flip. Other
    /// dimensions are untouched; a missing dimension-k entry is fine as long
    /// as the flip is over zero simplices.
    pub fn apply_flip(&self, flip: &OrientationFlip) -> Result<Self, ComplexError> {
        let mut out = self.clone();
        match out.by_dim.get_mut(&flip.dim()) {
            Some(t) => {
                if t.rows() != flip.len() {
                    return Err(ComplexError::FlipLengthMismatch {
                        dim: flip.dim(),
                        got: flip.len(),
                        expected: t.rows(),
                    });
                }
                let factors: Vec<f64> = flip.signs().iter().map(|&s| s as f64).collect();
                *t = t.scale_rows(&factors);
            }
            None if flip.is_empty() => {}
            None => {
                return Err(ComplexError::FlipLengthMismatch {
                    dim: flip.dim(),
                    got: flip.len(),
                    expected: 0,
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_resigns_only_its_dimension() {
        let mut f = CochainFeatures::new();
        f.insert(0, Tensor::from_rows(vec![vec![1.0], vec![2.0]]).unwrap());
        f.insert(1, Tensor::from_rows(vec![vec![3.0], vec![4.0]]).unwrap());
        let flip = OrientationFlip::new(1, vec![-1, 1]).unwrap();
        let flipped = f.apply_flip(&flip).unwrap();
        assert_eq!(flipped.get(0), f.get(0));
        assert_eq!(flipped.get(1).unwrap().data(), &[-3.0, 4.0]);
    }

    #[test]
    fn flip_length_must_match_rows() {
        let mut f = CochainFeatures::new();
        f.insert(1, Tensor::zeros(3, 2));
        let flip = OrientationFlip::identity(1, 2);
        assert!(matches!(
            f.apply_flip(&flip),
            Err(ComplexError::FlipLengthMismatch { .. })
        ));
    }
}
