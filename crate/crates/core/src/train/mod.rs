//! The experiment harness: configs, the training loop, checkpoint
//! evaluation and report aggregation.

use thiserror::Error;

use crate::complex::ComplexError;
use crate::data::DataError;
use crate::nn::NnError;
use crate::tensor::TensorError;

pub mod config;
pub mod evaluate;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use evaluate::{evaluate_checkpoint, EvalReport, Split};
pub use report::{collect_reports, csv, mean_stddev, table, EpochRecord, RunReport, SeedRun};
pub use runner::{
    count_params, evaluate_samples, prepare, train, train_default_cache, train_seed,
    PreparedDataset, PreparedSample,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad checkpoint: {0}")]
    BadMeta(String),
}
