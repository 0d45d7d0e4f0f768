//! Sparse matrices used across the crate.
//!
//! Boundary operators and Hodge Laplacians are exact integer matrices
//! ([`IntSparseMatrix`], coordinate list). Normalized operators fed to the
//! layers are f64 CSR matrices ([`CsrMatrix`]) with dense matmul kernels.

use std::collections::HashMap;

/// Sparse integer matrix in sorted coordinate-list form.
///
/// Entries are kept sorted by (row, col) with no explicit zeros, so equality
/// and serialization are canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, i64)>,
}

impl IntSparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    /// Builds from triplets, summing duplicates and dropping zeros.
    pub fn from_triplets(rows: usize, cols: usize, triplets: Vec<(usize, usize, i64)>) -> Self {
        let mut entries = triplets;
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, i64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            debug_assert!(r < rows && c < cols, "triplet out of bounds");
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|&(_, _, v)| v != 0);
        Self { rows, cols, entries: out }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, i64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
            .map(|i| self.entries[i].2)
            .unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, triplets)
    }

    /// Exact integer matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "sparse matmul dimension mismatch");
        // Index rhs rows for the accumulation pass.
        let mut rhs_rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); other.rows];
        for &(r, c, v) in &other.entries {
            rhs_rows[r].push((c, v));
        }
        let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
        for &(r, k, v) in &self.entries {
            for &(c, w) in &rhs_rows[k] {
                *acc.entry((r, c)).or_insert(0) += v * w;
            }
        }
        let triplets = acc.into_iter().map(|((r, c), v)| (r, c, v)).collect();
        Self::from_triplets(self.rows, other.cols, triplets)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut triplets = self.entries.clone();
        triplets.extend_from_slice(&other.entries);
        Self::from_triplets(self.rows, self.cols, triplets)
    }

    /// Scales row i by signs[i] (orientation flips act on boundary rows).
    pub fn scale_rows(&self, signs: &[i8]) -> Self {
        assert_eq!(signs.len(), self.rows);
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v * signs[r] as i64))
            .collect();
        Self::from_triplets(self.rows, self.cols, triplets)
    }

    /// Scales column j by signs[j].
    pub fn scale_cols(&self, signs: &[i8]) -> Self {
        assert_eq!(signs.len(), self.cols);
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v * signs[c] as i64))
            .collect();
        Self::from_triplets(self.rows, self.cols, triplets)
    }

    /// Dense copy, row-major. Intended for small matrices in tests/oracles.
    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut dense = vec![vec![0i64; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            dense[r][c] = v;
        }
        dense
    }

    /// Per-column sums of absolute values.
    pub fn col_abs_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.cols];
        for &(_, c, v) in &self.entries {
            sums[c] += v.abs();
        }
        sums
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let triplets: Vec<(usize, usize, f64)> = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v as f64))
            .collect();
        CsrMatrix::from_triplets(self.rows, self.cols, triplets)
    }
}

/// Sparse f64 matrix in CSR form with dense multiply kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < rows && c < cols);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut indptr = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            indptr[r + 1] += 1;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let indices = merged.iter().map(|t| t.1).collect();
        let values = merged.iter().map(|t| t.2).collect();
        Self { rows, cols, indptr, indices, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                triplets.push((self.indices[k], r, self.values[k]));
            }
        }
        Self::from_triplets(self.cols, self.rows, triplets)
    }

    /// out = self · x where x is dense row-major (x_rows = self.cols).
    pub fn mul_dense(&self, x: &[f64], x_cols: usize, out: &mut [f64]) {
        assert_eq!(x.len(), self.cols * x_cols);
        assert_eq!(out.len(), self.rows * x_cols);
        out.fill(0.0);
        for r in 0..self.rows {
            let dst = &mut out[r * x_cols..(r + 1) * x_cols];
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.values[k];
                let src = &x[self.indices[k] * x_cols..self.indices[k] * x_cols + x_cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
    }

    /// out += selfᵀ · x (used by the autodiff backward pass).
    pub fn tr_mul_dense_add(&self, x: &[f64], x_cols: usize, out: &mut [f64]) {
        assert_eq!(x.len(), self.rows * x_cols);
        assert_eq!(out.len(), self.cols * x_cols);
        for r in 0..self.rows {
            let src = &x[r * x_cols..(r + 1) * x_cols];
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.values[k];
                let dst_off = self.indices[k] * x_cols;
                let dst = &mut out[dst_off..dst_off + x_cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
    }
}
