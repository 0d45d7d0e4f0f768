//! Dataset construction: MNIST superpixel complexes and the synthetic
//! trajectory benchmark, plus the content-addressed cache they live in.

use thiserror::Error;

use crate::complex::ComplexError;
use crate::tensor::TensorError;

pub mod cache;
pub mod dataset;
pub mod idx;
pub mod mesh;
pub mod slic;
pub mod superpixel;
pub mod trajectory;

pub use dataset::{
    DatasetSpec, SuperpixelDataset, SuperpixelSpec, TrajectoryDataset, TrajectorySpec,
};
pub use idx::{read_idx_images, read_idx_labels, GrayImage};
pub use mesh::{delaunay, Hole, MeshSpec, TriangulatedMesh};
pub use slic::{slic, Segmentation, SlicParams};
pub use superpixel::{superpixel_sample, SuperpixelSample};
pub use trajectory::{
    make_trajectory_split, region_vertices, sample_trajectory, Corner, TrajectorySample,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{origin}: bad magic 0x{got:08x}, expected 0x{expected:08x}")]
    BadMagic { origin: String, got: u32, expected: u32 },
    #[error("{0}: file ends before the declared payload")]
    Truncated(String),
    #[error("image file has {images} entries but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("need {need} usable images, only {have} available")]
    NotEnough { need: usize, have: usize },
    #[error("triangulation needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {0} duplicates an earlier point")]
    DuplicatePoint(usize),
    #[error("point {0} cannot be inserted into the triangulation")]
    DegeneratePoint(usize),
    #[error("no mesh vertices in the {0} corner region")]
    EmptyRegion(&'static str),
    #[error("failed to route a trajectory after {0} attempts")]
    NoRoute(usize),
    #[error("segmentation produced {got} clusters, outside [{lo}, {hi}]")]
    ClusterCount { got: usize, lo: usize, hi: usize },
    #[error("cache entry is corrupt: {0}")]
    BadCache(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
