//! Random triangular meshes on the unit square, built with the Bowyer-Watson
//! incremental Delaunay algorithm and punctured by circular holes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex};

use super::DataError;

/// A circular region removed from the mesh: every vertex inside the disk is
/// deleted together with all simplices containing it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Hole {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl Hole {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.x;
        let dy = y - self.y;
        dx * dx + dy * dy < self.radius * self.radius
    }
}

/// Parameters for a punctured random mesh.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshSpec {
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_holes")]
    pub holes: Vec<Hole>,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_points() -> usize {
    1000
}

fn default_holes() -> Vec<Hole> {
    vec![
        Hole { x: 0.3, y: 0.3, radius: 0.15 },
        Hole { x: 0.7, y: 0.7, radius: 0.15 },
    ]
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            n_points: default_n_points(),
            holes: default_holes(),
            seed: 0,
        }
    }
}

/// A 2-dimensional simplicial complex together with the planar coordinates of
/// its vertices. Vertex ids index into `points`.
#[derive(Clone, Debug)]
pub struct TriangulatedMesh {
    pub complex: SimplicialComplex,
    pub points: Vec<(f64, f64)>,
}

impl MeshSpec {
    /// Samples points, triangulates them and carves out the holes.
    pub fn build(&self) -> Result<TriangulatedMesh, DataError> {
        if self.n_points < 3 {
            return Err(DataError::TooFewPoints(self.n_points));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let points: Vec<(f64, f64)> = (0..self.n_points)
            .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        let triangles = delaunay(&points)?;
        Ok(carve_holes(&points, &triangles, &self.holes))
    }
}

/// Delaunay-triangulates a point set, returning triangles as vertex index
/// triples. Points must be distinct; exact duplicates are rejected.
pub fn delaunay(points: &[(f64, f64)]) -> Result<Vec<[usize; 3]>, DataError> {
    if points.len() < 3 {
        return Err(DataError::TooFewPoints(points.len()));
    }
    let mut all = points.to_vec();
    for i in 1..all.len() {
        if all[..i].contains(&all[i]) {
            return Err(DataError::DuplicatePoint(i));
        }
    }

    // A triangle far outside the unit square; its vertices are stripped at the
    // end, leaving only triangles between real points.
    let (min_x, max_x) = bounds(points.iter().map(|p| p.0));
    let (min_y, max_y) = bounds(points.iter().map(|p| p.1));
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let n = points.len();
    all.push((min_x - 20.0 * span, min_y - 20.0 * span));
    all.push((max_x + 20.0 * span, min_y - 20.0 * span));
    all.push((min_x + 0.5 * (max_x - min_x), max_y + 20.0 * span));

    let mut triangles: Vec<[usize; 3]> = vec![ccw(&all, [n, n + 1, n + 2])];
    for p in 0..n {
        insert_point(&mut all, &mut triangles, p)?;
    }
    triangles.retain(|t| t.iter().all(|&v| v < n));
    Ok(triangles)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn insert_point(
    all: &mut [(f64, f64)],
    triangles: &mut Vec<[usize; 3]>,
    p: usize,
) -> Result<(), DataError> {
    // Nudge the point if it lands in a degenerate position (exactly on a
    // circumcircle or collinear with a cavity edge) until insertion succeeds.
    for attempt in 0..8 {
        let bad: Vec<usize> = (0..triangles.len())
            .filter(|&t| in_circumcircle(all, triangles[t], all[p]))
            .collect();
        if let Some(cavity) = cavity_boundary(triangles, &bad) {
            let mut kept = Vec::with_capacity(triangles.len() - bad.len() + cavity.len());
            for (t, tri) in triangles.iter().enumerate() {
                if !bad.contains(&t) {
                    kept.push(*tri);
                }
            }
            for (u, v) in cavity {
                kept.push([p, u, v]);
            }
            *triangles = kept;
            return Ok(());
        }
        let eps = 1e-9 * (attempt + 1) as f64;
        all[p].0 += eps;
        all[p].1 += eps * 0.7;
    }
    Err(DataError::DegeneratePoint(p))
}

/// Directed boundary edges of the union of the `bad` triangles. Returns None
/// when the cavity is not a simple polygon fan target (a degenerate insertion).
fn cavity_boundary(triangles: &[[usize; 3]], bad: &[usize]) -> Option<Vec<(usize, usize)>> {
    if bad.is_empty() {
        return None;
    }
    let mut directed = Vec::with_capacity(bad.len() * 3);
    for &t in bad {
        let [a, b, c] = triangles[t];
        directed.push((a, b));
        directed.push((b, c));
        directed.push((c, a));
    }
    let boundary: Vec<(usize, usize)> = directed
        .iter()
        .copied()
        .filter(|&(u, v)| !directed.contains(&(v, u)))
        .collect();
    if boundary.is_empty() || boundary.len() != bad.len() + 2 {
        return None;
    }
    Some(boundary)
}

fn ccw(points: &[(f64, f64)], t: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = t;
    if orient(points[a], points[b], points[c]) >= 0.0 {
        t
    } else {
        [a, c, b]
    }
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// True when `p` lies strictly inside the circumcircle of the triangle.
fn in_circumcircle(points: &[(f64, f64)], t: [usize; 3], p: (f64, f64)) -> bool {
    let [a, b, c] = ccw(points, t);
    let (ax, ay) = points[a];
    let (bx, by) = points[b];
    let (cx, cy) = points[c];
    let (px, py) = p;
    let m = [
        [ax - px, ay - py, (ax - px).powi(2) + (ay - py).powi(2)],
        [bx - px, by - py, (bx - px).powi(2) + (by - py).powi(2)],
        [cx - px, cy - py, (cx - px).powi(2) + (cy - py).powi(2)],
    ];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    det > 0.0
}

/// Circumcenter and squared radius of a triangle, used by validity checks.
pub fn circumcircle(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> ((f64, f64), f64) {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    let a2 = a.0 * a.0 + a.1 * a.1;
    let b2 = b.0 * b.0 + b.1 * b.1;
    let c2 = c.0 * c.0 + c.1 * c.1;
    let ux = (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d;
    let uy = (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d;
    let r2 = (a.0 - ux).powi(2) + (a.1 - uy).powi(2);
    ((ux, uy), r2)
}

fn carve_holes(
    points: &[(f64, f64)],
    triangles: &[[usize; 3]],
    holes: &[Hole],
) -> TriangulatedMesh {
    let alive: Vec<bool> = points
        .iter()
        .map(|&(x, y)| !holes.iter().any(|h| h.contains(x, y)))
        .collect();
    let mut new_id = vec![usize::MAX; points.len()];
    let mut kept_points = Vec::new();
    for (v, &ok) in alive.iter().enumerate() {
        if ok {
            new_id[v] = kept_points.len();
            kept_points.push(points[v]);
        }
    }

    // Surviving simplices: every face of the triangulation whose vertices all
    // survive. Triangles imply their edges, but an edge can outlive both of
    // its triangles, so edges are collected explicitly.
    let mut generators = Vec::new();
    let mut edges = std::collections::BTreeSet::new();
    for t in triangles {
        let mapped: Vec<usize> = t.iter().filter(|&&v| alive[v]).map(|&v| new_id[v]).collect();
        match mapped.len() {
            3 => {
                generators.push(Simplex::new(mapped.clone()).expect("distinct vertices"));
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        edges.insert((mapped[i].min(mapped[j]), mapped[i].max(mapped[j])));
                    }
                }
            }
            2 => {
                edges.insert((mapped[0].min(mapped[1]), mapped[0].max(mapped[1])));
            }
            _ => {}
        }
    }
    for (u, v) in edges {
        generators.push(Simplex::new(vec![u, v]).expect("distinct vertices"));
    }
    for v in 0..kept_points.len() {
        generators.push(Simplex::vertex(v));
    }

    TriangulatedMesh {
        complex: SimplicialComplex::from_simplices(generators),
        points: kept_points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrilateral_gives_two_triangles_and_five_edges() {
        let points = vec![(0.0, 0.0), (1.0, 0.05), (0.95, 1.0), (0.1, 0.9)];
        let triangles = delaunay(&points).unwrap();
        assert_eq!(triangles.len(), 2);
        let mesh = carve_holes(&points, &triangles, &[]);
        assert_eq!(mesh.complex.num_simplices(0), 4);
        assert_eq!(mesh.complex.num_simplices(1), 5);
        assert_eq!(mesh.complex.num_simplices(2), 2);
    }

    #[test]
    fn circumcircles_are_empty_for_small_point_sets() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..=50);
            let points: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let triangles = delaunay(&points).unwrap();
            assert!(!triangles.is_empty());
            for t in &triangles {
                let (center, r2) = circumcircle(points[t[0]], points[t[1]], points[t[2]]);
                for (v, p) in points.iter().enumerate() {
                    if t.contains(&v) {
                        continue;
                    }
                    let d2 = (p.0 - center.0).powi(2) + (p.1 - center.1).powi(2);
                    assert!(
                        d2 >= r2 * (1.0 - 1e-9),
                        "seed {seed}: vertex {v} inside circumcircle of {t:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn every_point_appears_in_the_triangulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<(f64, f64)> =
            (0..40).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let triangles = delaunay(&points).unwrap();
        let mut seen = vec![false; points.len()];
        for t in &triangles {
            for &v in t {
                seen[v] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "some points missing from the mesh");
    }

    #[test]
    fn holes_remove_inside_vertices_and_incident_simplices() {
        let spec = MeshSpec { n_points: 400, seed: 7, ..MeshSpec::default() };
        let mesh = spec.build().unwrap();
        for &(x, y) in &mesh.points {
            for hole in &default_holes() {
                assert!(!hole.contains(x, y), "vertex ({x}, {y}) inside a hole");
            }
        }
        assert_eq!(mesh.complex.num_simplices(0), mesh.points.len());
        assert!(mesh.complex.num_simplices(2) > 0);
        // Faces of every triangle must be present with matching boundary rank.
        let b2 = mesh.complex.boundary_matrix(2).unwrap();
        assert_eq!(b2.rows(), mesh.complex.num_simplices(1));
        assert_eq!(b2.cols(), mesh.complex.num_simplices(2));
    }

    #[test]
    fn meshes_are_deterministic_in_the_seed() {
        let spec = MeshSpec { n_points: 200, seed: 11, ..MeshSpec::default() };
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.complex.to_text(), b.complex.to_text());
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let points = vec![(0.1, 0.2), (0.5, 0.5), (0.1, 0.2), (0.9, 0.1)];
        assert!(matches!(delaunay(&points), Err(DataError::DuplicatePoint(2))));
    }
}
