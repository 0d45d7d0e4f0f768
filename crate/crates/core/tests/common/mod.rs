#![allow(dead_code)]

pub mod layers;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sat_core::{
    build_clique_complex, CochainFeatures, OrientationFlip, SimplicialComplex, Tensor,
    UndirectedGraph,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize, p: f64) -> UndirectedGraph {
    let n = rng.gen_range(n_min..=n_max);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    UndirectedGraph::new(n, &edges).expect("generated edges are valid")
}

/// A clique complex with at least one edge.
pub fn complex_with_edges(rng: &mut ChaCha8Rng) -> SimplicialComplex {
    loop {
        let c = build_clique_complex(&random_graph(rng, 4, 8, 0.5), 2);
        if c.num_simplices(1) > 0 {
            return c;
        }
    }
}

/// A clique complex with at least one triangle.
pub fn complex_with_triangles(rng: &mut ChaCha8Rng) -> SimplicialComplex {
    loop {
        let c = build_clique_complex(&random_graph(rng, 5, 8, 0.7), 2);
        if c.num_simplices(2) > 0 {
            return c;
        }
    }
}

pub fn uniform_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::new(rows, cols, data).expect("length matches")
}

/// Random features for the listed (dimension, width) pairs.
pub fn features_for(
    rng: &mut ChaCha8Rng,
    complex: &SimplicialComplex,
    dims: &[(usize, usize)],
) -> CochainFeatures {
    let mut f = CochainFeatures::new();
    for &(k, width) in dims {
        let n = complex.num_simplices(k);
        if n > 0 {
            f.insert(k, uniform_tensor(rng, n, width));
        }
    }
    f
}

pub fn random_flip(rng: &mut ChaCha8Rng, dim: usize, len: usize) -> OrientationFlip {
    let signs = (0..len).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    OrientationFlip::new(dim, signs).expect("signs are unit")
}

/// Applies a diagonal sign matrix to the rows of raw output data.
pub fn sign_rows(data: &[f64], cols: usize, signs: &[i8]) -> Vec<f64> {
    let mut out = data.to_vec();
    for (r, &s) in signs.iter().enumerate() {
        if s < 0 {
            for v in &mut out[r * cols..(r + 1) * cols] {
                *v = -*v;
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
