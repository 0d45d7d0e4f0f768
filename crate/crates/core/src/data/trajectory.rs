//! Synthetic trajectory classification on a punctured mesh. Each sample is an
//! edge flow tracing a route from the top-left corner of the unit square to
//! the bottom-right corner, detouring either through the top-right region
//! (class 0) or the bottom-left region (class 1).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::complex::{OrientationFlip, Simplex};

use super::mesh::TriangulatedMesh;
use super::DataError;

const CORNER_SIDE: f64 = 0.2;
const MAX_ROUTE_ATTEMPTS: usize = 50;

/// The four corner regions of the unit square, axis-aligned squares of side
/// 0.2 anchored in each corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Corner {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let near_left = x <= CORNER_SIDE;
        let near_right = x >= 1.0 - CORNER_SIDE;
        let near_bottom = y <= CORNER_SIDE;
        let near_top = y >= 1.0 - CORNER_SIDE;
        match self {
            Corner::TopLeft => near_left && near_top,
            Corner::TopRight => near_right && near_top,
            Corner::BottomLeft => near_left && near_bottom,
            Corner::BottomRight => near_right && near_bottom,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Corner::TopLeft => "top-left",
            Corner::TopRight => "top-right",
            Corner::BottomLeft => "bottom-left",
            Corner::BottomRight => "bottom-right",
        }
    }
}

/// Vertex ids of the mesh that fall inside a corner region.
pub fn region_vertices(mesh: &TriangulatedMesh, corner: Corner) -> Vec<usize> {
    mesh.points
        .iter()
        .enumerate()
        .filter(|(_, &(x, y))| corner.contains(x, y))
        .map(|(v, _)| v)
        .collect()
}

/// One labelled trajectory. `chain` has one entry per mesh edge: +1 when the
/// route traverses the edge from its lower to its higher vertex id, -1 for
/// the opposite direction and 0 off the route. `flip` records the orientation
/// reassignment baked into the chain (identity for training data).
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub chain: Vec<f64>,
    pub label: usize,
    pub route: Vec<usize>,
    pub flip: OrientationFlip,
}

/// Samples a single trajectory of the given class over the mesh.
pub fn sample_trajectory<R: Rng + ?Sized>(
    mesh: &TriangulatedMesh,
    label: usize,
    rng: &mut R,
) -> Result<TrajectorySample, DataError> {
    let adjacency = edge_adjacency(mesh);
    sample_route(mesh, &adjacency, label, rng)
}

struct EdgeAdjacency {
    /// Per vertex: (neighbor vertex, edge id, euclidean length).
    neighbors: Vec<Vec<(usize, usize, f64)>>,
    n_edges: usize,
}

fn edge_adjacency(mesh: &TriangulatedMesh) -> EdgeAdjacency {
    let n_vertices = mesh.complex.num_simplices(0);
    let edges = mesh.complex.simplices(1);
    let mut neighbors = vec![Vec::new(); n_vertices];
    for (e, edge) in edges.iter().enumerate() {
        let [u, v] = [edge.vertices()[0], edge.vertices()[1]];
        let (ux, uy) = mesh.points[u];
        let (vx, vy) = mesh.points[v];
        let len = ((ux - vx).powi(2) + (uy - vy).powi(2)).sqrt();
        neighbors[u].push((v, e, len));
        neighbors[v].push((u, e, len));
    }
    EdgeAdjacency { neighbors, n_edges: edges.len() }
}

fn sample_route<R: Rng + ?Sized>(
    mesh: &TriangulatedMesh,
    adjacency: &EdgeAdjacency,
    label: usize,
    rng: &mut R,
) -> Result<TrajectorySample, DataError> {
    let waypoint_corner = if label == 0 { Corner::TopRight } else { Corner::BottomLeft };
    let pools = [
        (Corner::TopLeft, region_vertices(mesh, Corner::TopLeft)),
        (waypoint_corner, region_vertices(mesh, waypoint_corner)),
        (Corner::BottomRight, region_vertices(mesh, Corner::BottomRight)),
    ];
    for (corner, pool) in &pools {
        if pool.is_empty() {
            return Err(DataError::EmptyRegion(corner.name()));
        }
    }

    for _ in 0..MAX_ROUTE_ATTEMPTS {
        let start = *pools[0].1.choose(rng).expect("non-empty pool");
        let waypoint = *pools[1].1.choose(rng).expect("non-empty pool");
        let end = *pools[2].1.choose(rng).expect("non-empty pool");

        // Fresh multiplicative jitter per attempt keeps routes diverse while
        // leaving edge weights non-negative for the shortest-path search.
        let weights: Vec<f64> = (0..adjacency.n_edges)
            .map(|_| {
                let xi: f64 = rng.sample(Exp1);
                xi.max(1e-12)
            })
            .collect();

        let Some(first) = shortest_path(adjacency, &weights, start, waypoint) else {
            continue;
        };
        let Some(second) = shortest_path(adjacency, &weights, waypoint, end) else {
            continue;
        };

        let mut route = first;
        route.extend_from_slice(&second[1..]);
        let mut seen = std::collections::HashSet::with_capacity(route.len());
        if !route.iter().all(|v| seen.insert(*v)) {
            continue;
        }

        let chain = chain_from_route(mesh, &route);
        let flip = OrientationFlip::identity(1, adjacency.n_edges);
        return Ok(TrajectorySample { chain, label, route, flip });
    }
    Err(DataError::NoRoute(MAX_ROUTE_ATTEMPTS))
}

fn chain_from_route(mesh: &TriangulatedMesh, route: &[usize]) -> Vec<f64> {
    let mut chain = vec![0.0; mesh.complex.num_simplices(1)];
    for pair in route.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        let edge = Simplex::new(vec![u, v]).expect("route steps join distinct vertices");
        let e = mesh
            .complex
            .simplex_index(1, &edge)
            .expect("route follows existing mesh edges");
        chain[e] = if u < v { 1.0 } else { -1.0 };
    }
    chain
}

#[derive(PartialEq)]
struct QueueEntry {
    cost: f64,
    vertex: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn shortest_path(
    adjacency: &EdgeAdjacency,
    edge_weights: &[f64],
    start: usize,
    goal: usize,
) -> Option<Vec<usize>> {
    let n = adjacency.neighbors.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(QueueEntry { cost: 0.0, vertex: start });

    while let Some(QueueEntry { cost, vertex }) = heap.pop() {
        if vertex == goal {
            break;
        }
        if cost > dist[vertex] {
            continue;
        }
        for &(next, edge, len) in &adjacency.neighbors[vertex] {
            let candidate = cost + len * edge_weights[edge];
            if candidate < dist[next] {
                dist[next] = candidate;
                prev[next] = vertex;
                heap.push(QueueEntry { cost: candidate, vertex: next });
            }
        }
    }

    if dist[goal].is_infinite() {
        return None;
    }
    let mut path = vec![goal];
    while *path.last().unwrap() != start {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path)
}

/// Builds the train/test split for the trajectory benchmark. Training samples
/// keep the canonical mesh orientation; each test sample carries its own
/// random orientation flip applied to the chain.
pub fn make_trajectory_split<R: Rng + ?Sized>(
    mesh: &TriangulatedMesh,
    n_train: usize,
    n_test: usize,
    rng: &mut R,
) -> Result<(Vec<TrajectorySample>, Vec<TrajectorySample>), DataError> {
    let adjacency = edge_adjacency(mesh);
    let mut train = Vec::with_capacity(n_train);
    for i in 0..n_train {
        train.push(sample_route(mesh, &adjacency, i % 2, rng)?);
    }
    let mut test = Vec::with_capacity(n_test);
    for i in 0..n_test {
        let mut sample = sample_route(mesh, &adjacency, i % 2, rng)?;
        let flip = OrientationFlip::random(1, adjacency.n_edges, rng);
        for (value, &sign) in sample.chain.iter_mut().zip(flip.signs()) {
            *value *= f64::from(sign);
        }
        sample.flip = flip;
        test.push(sample);
    }
    Ok((train, test))
}
