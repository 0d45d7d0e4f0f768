//! Simplicial attention networks: complexes, autodiff, layers, datasets and
//! the training harness behind the `sat` command-line tool.

pub mod complex;
pub mod data;
pub mod nn;
pub mod sparse;
pub mod tensor;
pub mod train;

pub use complex::{
    apply_flip, build_clique_complex, ComplexError, HodgeLaplacian, Neighbor, NeighborhoodTable,
    OrientationFlip, Simplex, SimplicialComplex, UndirectedGraph,
};
pub use data::{
    DataError, DatasetSpec, GrayImage, MeshSpec, SuperpixelDataset, SuperpixelSample,
    SuperpixelSpec, TrajectoryDataset, TrajectorySample, TrajectorySpec, TriangulatedMesh,
};
pub use nn::{
    sat_attention, Activation, AttentionCoefficients, BatchOptions, BatchSample, BatchStructure,
    CochainFeatures, ModelKind, Network, NetworkSpec, NnError, TaskKind,
};
pub use sparse::{CsrMatrix, IntSparseMatrix};
pub use tensor::{
    AdamConfig, AdamState, Graph, ParamBinding, ParamId, ParamSet, SegmentIndex, Tensor,
    TensorError, Var,
};
pub use train::{
    evaluate_checkpoint, train, EvalReport, ExperimentConfig, ExperimentKind, RunReport, SeedRun,
    Split, TrainError,
};
