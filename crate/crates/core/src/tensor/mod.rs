//! Dense tensors, reverse-mode differentiation and the Adam optimizer.

mod adam;
mod checkpoint;
mod dense;
pub mod gradcheck;
mod graph;
mod params;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use dense::Tensor;
pub use graph::{Graph, SegmentIndex, Var};
pub use params::{ParamBinding, ParamId, ParamSet};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("data length {len} does not match shape {rows}x{cols}")]
    LengthMismatch { rows: usize, cols: usize, len: usize },
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("segment {0} is empty")]
    EmptySegment(usize),
    #[error("segment offsets must start at 0 and be non-decreasing")]
    BadSegmentOffsets,
    #[error("{op} expects {expected} entries, segment index covers {got}")]
    SegmentCoverage {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("loss must be a scalar, got {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },
    #[error("parameter {0} has no gradient")]
    MissingGrad(String),
    #[error("parameter {0} registered twice")]
    DuplicateParam(String),
    #[error("unknown parameter {0}")]
    UnknownParam(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
}
