//! Superpixel complexes for image classification: a SLIC segmentation turns
//! an image into a region adjacency graph, whose clique complex carries mean
//! intensity and position features on vertices, edges and triangles.

use std::collections::BTreeSet;

use crate::complex::{build_clique_complex, SimplicialComplex, UndirectedGraph};
use crate::nn::CochainFeatures;
use crate::tensor::Tensor;

use super::idx::GrayImage;
use super::slic::{slic, Segmentation, SlicParams};
use super::DataError;

/// One labelled superpixel complex. Vertex features are (mean x, mean y,
/// mean intensity) per cluster with coordinates scaled into [0, 1]; edge and
/// triangle features concatenate the features of their vertices in order of
/// ascending mean intensity (ties broken by cluster id), giving widths 3, 6
/// and 9.
#[derive(Clone, Debug)]
pub struct SuperpixelSample {
    pub complex: SimplicialComplex,
    pub features: CochainFeatures,
    pub label: usize,
}

pub const VERTEX_FEATURE_WIDTH: usize = 3;

pub fn superpixel_sample(
    image: &GrayImage,
    label: usize,
    params: &SlicParams,
) -> Result<SuperpixelSample, DataError> {
    let seg = slic(image, params)?;
    from_segmentation(image, &seg, label)
}

pub fn from_segmentation(
    image: &GrayImage,
    seg: &Segmentation,
    label: usize,
) -> Result<SuperpixelSample, DataError> {
    let n = seg.n_clusters;
    let mut sums = vec![(0.0f64, 0.0f64, 0.0f64, 0usize); n];
    for y in 0..image.height {
        for x in 0..image.width {
            let s = &mut sums[seg.labels[y * image.width + x]];
            s.0 += x as f64;
            s.1 += y as f64;
            s.2 += image.get(x, y);
            s.3 += 1;
        }
    }
    let x_span = (image.width - 1).max(1) as f64;
    let y_span = (image.height - 1).max(1) as f64;
    let node_features: Vec<[f64; 3]> = sums
        .iter()
        .map(|&(sx, sy, sg, count)| {
            let k = count as f64;
            [sx / k / x_span, sy / k / y_span, sg / k]
        })
        .collect();

    let mut adjacent = BTreeSet::new();
    for y in 0..image.height {
        for x in 0..image.width {
            let here = seg.labels[y * image.width + x];
            if x + 1 < image.width {
                let right = seg.labels[y * image.width + x + 1];
                if right != here {
                    adjacent.insert((here.min(right), here.max(right)));
                }
            }
            if y + 1 < image.height {
                let below = seg.labels[(y + 1) * image.width + x];
                if below != here {
                    adjacent.insert((here.min(below), here.max(below)));
                }
            }
        }
    }
    let edges: Vec<(usize, usize)> = adjacent.into_iter().collect();
    let graph = UndirectedGraph::new(n, &edges)?;
    let complex = build_clique_complex(&graph, 2);

    let mut features = CochainFeatures::new();
    features.insert(
        0,
        Tensor::from_rows(node_features.iter().map(|f| f.to_vec()).collect())?,
    );
    for dim in 1..=complex.max_dim() {
        if complex.num_simplices(dim) == 0 {
            continue;
        }
        let rows = complex
            .simplices(dim)
            .iter()
            .map(|simplex| {
                let mut order: Vec<usize> = simplex.vertices().to_vec();
                order.sort_by(|&a, &b| {
                    node_features[a][2]
                        .total_cmp(&node_features[b][2])
                        .then(a.cmp(&b))
                });
                order
                    .into_iter()
                    .flat_map(|v| node_features[v])
                    .collect::<Vec<f64>>()
            })
            .collect();
        features.insert(dim, Tensor::from_rows(rows)?);
    }

    Ok(SuperpixelSample { complex, features, label })
}
