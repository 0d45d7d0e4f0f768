//! SLIC superpixel segmentation for grayscale images: k-means over a joint
//! intensity/position metric with cluster centers seeded on a regular grid.

use super::idx::GrayImage;
use super::DataError;

#[derive(Clone, Copy, Debug)]
pub struct SlicParams {
    pub clusters: usize,
    pub compactness: f64,
    pub iterations: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        SlicParams { clusters: 75, compactness: 0.25, iterations: 10 }
    }
}

/// Per-pixel cluster labels, compacted to 0..n_clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub labels: Vec<usize>,
    pub n_clusters: usize,
}

#[derive(Clone, Copy)]
struct Center {
    x: f64,
    y: f64,
    intensity: f64,
}

/// Segments the image into roughly `params.clusters` connected superpixels.
/// Fails when the final cluster count drifts outside [k/2, 3k/2].
pub fn slic(image: &GrayImage, params: &SlicParams) -> Result<Segmentation, DataError> {
    let (w, h) = (image.width, image.height);
    let spacing = ((w * h) as f64 / params.clusters as f64).sqrt();
    let mut centers = seed_centers(image, spacing);
    let mut labels = vec![usize::MAX; w * h];

    for _ in 0..params.iterations {
        assign_pixels(image, &centers, spacing, params.compactness, &mut labels);
        update_centers(image, &labels, &mut centers);
    }

    merge_orphan_fragments(&mut labels, w, h);
    let n_clusters = compact_labels(&mut labels);

    let lo = params.clusters / 2;
    let hi = params.clusters + params.clusters / 2;
    if n_clusters < lo || n_clusters > hi {
        return Err(DataError::ClusterCount { got: n_clusters, lo, hi });
    }
    Ok(Segmentation { labels, n_clusters })
}

fn seed_centers(image: &GrayImage, spacing: f64) -> Vec<Center> {
    let mut centers = Vec::new();
    let mut y = spacing / 2.0;
    while y < image.height as f64 {
        let mut x = spacing / 2.0;
        while x < image.width as f64 {
            let px = (x.round() as usize).min(image.width - 1);
            let py = (y.round() as usize).min(image.height - 1);
            centers.push(Center { x, y, intensity: image.get(px, py) });
            x += spacing;
        }
        y += spacing;
    }
    centers
}

fn distance(center: &Center, x: usize, y: usize, g: f64, spacing: f64, compactness: f64) -> f64 {
    let dx = x as f64 - center.x;
    let dy = y as f64 - center.y;
    let spatial = (dx * dx + dy * dy).sqrt();
    let tonal = g - center.intensity;
    let scaled = compactness * spatial / spacing;
    (tonal * tonal + scaled * scaled).sqrt()
}

fn assign_pixels(
    image: &GrayImage,
    centers: &[Center],
    spacing: f64,
    compactness: f64,
    labels: &mut [usize],
) {
    let (w, h) = (image.width, image.height);
    let mut best = vec![f64::INFINITY; w * h];
    labels.fill(usize::MAX);

    for (c, center) in centers.iter().enumerate() {
        let x_lo = ((center.x - spacing).floor().max(0.0)) as usize;
        let x_hi = ((center.x + spacing).ceil() as usize).min(w - 1);
        let y_lo = ((center.y - spacing).floor().max(0.0)) as usize;
        let y_hi = ((center.y + spacing).ceil() as usize).min(h - 1);
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                let p = y * w + x;
                let d = distance(center, x, y, image.pixels[p], spacing, compactness);
                if d < best[p] {
                    best[p] = d;
                    labels[p] = c;
                }
            }
        }
    }

    // Pixels outside every search window fall back to a full scan.
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if labels[p] != usize::MAX {
                continue;
            }
            for (c, center) in centers.iter().enumerate() {
                let d = distance(center, x, y, image.pixels[p], spacing, compactness);
                if d < best[p] {
                    best[p] = d;
                    labels[p] = c;
                }
            }
        }
    }
}

fn update_centers(image: &GrayImage, labels: &[usize], centers: &mut [Center]) {
    let mut sums = vec![(0.0, 0.0, 0.0, 0usize); centers.len()];
    for y in 0..image.height {
        for x in 0..image.width {
            let c = labels[y * image.width + x];
            let s = &mut sums[c];
            s.0 += x as f64;
            s.1 += y as f64;
            s.2 += image.get(x, y);
            s.3 += 1;
        }
    }
    for (center, (sx, sy, sg, n)) in centers.iter_mut().zip(sums) {
        if n > 0 {
            center.x = sx / n as f64;
            center.y = sy / n as f64;
            center.intensity = sg / n as f64;
        }
    }
}

/// Connected fragments of each cluster, in row-major discovery order.
fn fragments(labels: &[usize], w: usize, h: usize) -> Vec<Vec<usize>> {
    let mut component = vec![usize::MAX; labels.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for start in 0..labels.len() {
        if component[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut pixels = vec![start];
        component[start] = id;
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut push = |q: usize| {
                if component[q] == usize::MAX && labels[q] == labels[start] {
                    component[q] = id;
                    pixels.push(q);
                    stack.push(q);
                }
            };
            if x > 0 {
                push(p - 1);
            }
            if x + 1 < w {
                push(p + 1);
            }
            if y > 0 {
                push(p - w);
            }
            if y + 1 < h {
                push(p + w);
            }
        }
        out.push(pixels);
    }
    out
}

/// Keeps the largest fragment of every cluster and relabels the rest into
/// whichever neighboring cluster touches them over the longest border.
fn merge_orphan_fragments(labels: &mut [usize], w: usize, h: usize) {
    let parts = fragments(labels, w, h);
    let mut keeper: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for (f, pixels) in parts.iter().enumerate() {
        let cluster = labels[pixels[0]];
        let entry = keeper.entry(cluster).or_insert(f);
        if parts[*entry].len() < pixels.len() {
            *entry = f;
        }
    }
    for (f, pixels) in parts.iter().enumerate() {
        let cluster = labels[pixels[0]];
        if keeper[&cluster] == f {
            continue;
        }
        let mut border: std::collections::BTreeMap<usize, usize> =
            std::collections::BTreeMap::new();
        for &p in pixels {
            let (x, y) = (p % w, p / w);
            let mut count = |q: usize| {
                if labels[q] != cluster {
                    *border.entry(labels[q]).or_insert(0) += 1;
                }
            };
            if x > 0 {
                count(p - 1);
            }
            if x + 1 < w {
                count(p + 1);
            }
            if y > 0 {
                count(p - w);
            }
            if y + 1 < h {
                count(p + w);
            }
        }
        let Some((&target, _)) = border.iter().max_by_key(|(label, n)| (**n, std::cmp::Reverse(**label)))
        else {
            continue;
        };
        for &p in pixels {
            labels[p] = target;
        }
    }
}

fn compact_labels(labels: &mut [usize]) -> usize {
    let mut remap: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for label in labels.iter_mut() {
        let next = remap.len();
        *label = *remap.entry(*label).or_insert(next);
    }
    remap.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_image() -> GrayImage {
        let (w, h) = (28, 28);
        let pixels = (0..w * h)
            .map(|p| {
                let (x, y) = (p % w, p / w);
                (x + y) as f64 / (w + h - 2) as f64
            })
            .collect();
        GrayImage { width: w, height: h, pixels }
    }

    fn blob_image() -> GrayImage {
        let (w, h) = (28, 28);
        let pixels = (0..w * h)
            .map(|p| {
                let (x, y) = ((p % w) as f64, (p / w) as f64);
                let d = ((x - 14.0).powi(2) + (y - 14.0).powi(2)).sqrt();
                if d < 7.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        GrayImage { width: w, height: h, pixels }
    }

    #[test]
    fn cluster_count_stays_near_the_target() {
        for image in [gradient_image(), blob_image()] {
            let seg = slic(&image, &SlicParams::default()).unwrap();
            assert!(seg.n_clusters >= 37 && seg.n_clusters <= 112, "{}", seg.n_clusters);
            assert_eq!(seg.labels.len(), 28 * 28);
        }
    }

    #[test]
    fn every_cluster_is_connected() {
        let seg = slic(&blob_image(), &SlicParams::default()).unwrap();
        let parts = fragments(&seg.labels, 28, 28);
        assert_eq!(parts.len(), seg.n_clusters, "a cluster splits into fragments");
    }

    #[test]
    fn labels_are_compact_and_row_major_ordered() {
        let seg = slic(&gradient_image(), &SlicParams::default()).unwrap();
        let mut seen_max = 0usize;
        for &label in &seg.labels {
            assert!(label <= seen_max, "label {label} appears before {seen_max}");
            seen_max = seen_max.max(label + 1);
        }
        assert_eq!(seen_max, seg.n_clusters);
    }

    #[test]
    fn segmentation_is_deterministic() {
        let image = blob_image();
        let a = slic(&image, &SlicParams::default()).unwrap();
        let b = slic(&image, &SlicParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flat_images_segment_into_grid_cells() {
        let image = GrayImage { width: 28, height: 28, pixels: vec![0.5; 784] };
        let seg = slic(&image, &SlicParams::default()).unwrap();
        assert!(seg.n_clusters >= 37);
    }
}
