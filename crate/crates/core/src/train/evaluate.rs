//! Evaluation of saved checkpoints: the config travels inside the checkpoint
//! metadata, so a path and a split name are enough to reproduce a score.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::nn::Network;
use crate::tensor::{load_checkpoint, ParamSet};

use super::config::ExperimentConfig;
use super::runner::{evaluate_samples, prepare};
use super::TrainError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(TrainError::Config(format!(
                "unknown split {other:?}, expected train, val or test"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub split: Split,
    pub samples: usize,
    pub accuracy: f64,
    pub config: ExperimentConfig,
}

/// Rebuilds the network described in the checkpoint metadata, restores its
/// parameters, and scores the requested split of the config's dataset.
pub fn evaluate_checkpoint(
    path: &Path,
    split: Split,
    cache_root: &Path,
) -> Result<EvalReport, TrainError> {
    let (loaded, meta) = load_checkpoint(path)?;
    let config: ExperimentConfig = serde_json::from_str(&meta)
        .map_err(|e| TrainError::BadMeta(format!("{}: {e}", path.display())))?;
    config.validate()?;

    let mut params = ParamSet::new();
    let network = Network::build(&config.network_spec(), &mut params, 0)?;
    copy_params(&mut params, &loaded)?;

    let data = prepare(&config, cache_root)?;
    let samples = match split {
        Split::Train => &data.train,
        Split::Val => &data.val,
        Split::Test => &data.test,
    };
    if samples.is_empty() {
        return Err(TrainError::Config(format!(
            "the {} experiment has no {split:?} split",
            config.experiment.label()
        )));
    }
    let accuracy = evaluate_samples(&network, &params, samples)?;
    Ok(EvalReport { split, samples: samples.len(), accuracy, config })
}

/// Copies values from a loaded checkpoint into a freshly built parameter
/// set, insisting on an exact name and shape match in both directions.
fn copy_params(params: &mut ParamSet, loaded: &ParamSet) -> Result<(), TrainError> {
    if params.len() != loaded.len() {
        return Err(TrainError::BadMeta(format!(
            "checkpoint has {} parameters, architecture needs {}",
            loaded.len(),
            params.len()
        )));
    }
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        let name = params.name(id).to_string();
        let Some(source) = loaded.id(&name) else {
            return Err(TrainError::BadMeta(format!("checkpoint is missing parameter {name}")));
        };
        let value = loaded.value(source);
        if value.shape() != params.value(id).shape() {
            return Err(TrainError::BadMeta(format!(
                "parameter {name} is {:?} in the checkpoint but {:?} in the architecture",
                value.shape(),
                params.value(id).shape()
            )));
        }
        *params.value_mut(id) = value.clone();
    }
    Ok(())
}
