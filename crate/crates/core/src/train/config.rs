//! Experiment configuration: a JSON-serializable description of one training
//! run (model, architecture, optimizer settings, dataset) plus validation
//! and the mapping onto a concrete network spec.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::DatasetSpec;
use crate::nn::{Activation, ModelKind, NetworkSpec, TaskKind};

use super::TrainError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Superpixel,
    Trajectory,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Superpixel => "superpixel",
            ExperimentKind::Trajectory => "trajectory",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub layers: usize,
    /// Channels per layer; per head for attention models.
    pub channels: usize,
    #[serde(default = "default_heads")]
    pub heads: usize,
    pub activation: Activation,
    #[serde(default)]
    pub signed: bool,
    #[serde(default)]
    pub residual: bool,
    #[serde(default = "default_readout_hidden")]
    pub readout_hidden: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Defaults to 32 for superpixel runs and 4 for trajectory runs.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub dataset: DatasetSpec,
}

fn default_heads() -> usize {
    1
}

fn default_readout_hidden() -> usize {
    64
}

fn default_epochs() -> usize {
    100
}

fn default_learning_rate() -> f64 {
    1e-3
}

fn default_weight_decay() -> f64 {
    5e-4
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self, TrainError> {
        let config: ExperimentConfig = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size.unwrap_or(match self.experiment {
            ExperimentKind::Superpixel => 32,
            ExperimentKind::Trajectory => 4,
        })
    }

    /// Structural checks every run needs. Signed attention with a non-odd
    /// activation passes here (it is the designated negative control); use
    /// [`validate_strict`](Self::validate_strict) to reject it.
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: String| Err(TrainError::Config(msg));
        if self.layers == 0 {
            return fail("layers must be at least 1".into());
        }
        if self.channels == 0 {
            return fail("channels must be at least 1".into());
        }
        if self.heads == 0 {
            return fail("heads must be at least 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size() == 0 {
            return fail("batch_size must be at least 1".into());
        }
        if self.readout_hidden == 0 {
            return fail("readout_hidden must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for &seed in &self.seeds {
            if !seen.insert(seed) {
                return fail(format!("seed {seed} appears twice"));
            }
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return fail("learning_rate must be positive".into());
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return fail("weight_decay must be non-negative".into());
        }
        match (&self.experiment, &self.dataset) {
            (ExperimentKind::Superpixel, DatasetSpec::Superpixel(_)) => {}
            (ExperimentKind::Trajectory, DatasetSpec::Trajectory(_)) => {}
            (kind, spec) => {
                return fail(format!(
                    "{} experiment cannot use a {} dataset",
                    kind.label(),
                    spec.kind()
                ));
            }
        }
        if self.experiment == ExperimentKind::Trajectory
            && matches!(self.model, ModelKind::Gcn | ModelKind::Gat)
        {
            return fail(format!(
                "{} models see vertices only and cannot classify edge flows",
                self.model.label()
            ));
        }
        if self.signed && self.model != ModelKind::Sat {
            return fail(format!(
                "signed attention only applies to sat models, not {}",
                self.model.label()
            ));
        }
        if self.heads > 1 && !matches!(self.model, ModelKind::Sat | ModelKind::Gat) {
            return fail(format!("{} models do not use attention heads", self.model.label()));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the equivariance requirement: signed
    /// attention must use an odd activation, since anything else silently
    /// destroys the property the signed mode exists for.
    pub fn validate_strict(&self) -> Result<(), TrainError> {
        self.validate()?;
        if self.signed && !self.activation.is_odd() {
            return Err(TrainError::Config(format!(
                "signed attention needs an odd activation, got {:?}",
                self.activation
            )));
        }
        Ok(())
    }

    /// Input feature widths per carried dimension, fixed by the experiment
    /// and the model family.
    pub fn input_widths(&self) -> BTreeMap<usize, usize> {
        match self.experiment {
            ExperimentKind::Superpixel => match self.model {
                ModelKind::Gcn | ModelKind::Gat => BTreeMap::from([(0, 3)]),
                _ => BTreeMap::from([(0, 3), (1, 6), (2, 9)]),
            },
            ExperimentKind::Trajectory => match self.model {
                // Cross-dimension convolutions need carrier rows above and
                // below the edges; those start as zero-width-one features.
                ModelKind::Scconv => BTreeMap::from([(0, 1), (1, 1), (2, 1)]),
                _ => BTreeMap::from([(1, 1)]),
            },
        }
    }

    pub fn network_spec(&self) -> NetworkSpec {
        let (task, classes) = match self.experiment {
            ExperimentKind::Superpixel => (TaskKind::Classification, 10),
            ExperimentKind::Trajectory => (TaskKind::EdgeOrientation, 2),
        };
        NetworkSpec {
            kind: self.model,
            task,
            input_widths: self.input_widths(),
            layers: self.layers,
            hidden: self.channels,
            heads: self.heads,
            signed: self.signed,
            bias: !self.signed,
            activation: self.activation,
            readout_hidden: self.readout_hidden,
            classes,
            residual: self.residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SuperpixelSpec, TrajectorySpec};

    fn trajectory_config() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Trajectory,
            model: ModelKind::Sat,
            layers: 4,
            channels: 32,
            heads: 1,
            activation: Activation::Identity,
            signed: true,
            residual: true,
            readout_hidden: 32,
            epochs: 100,
            batch_size: None,
            learning_rate: 1e-3,
            weight_decay: 5e-4,
            seeds: vec![0, 1, 2, 3, 4],
            dataset: DatasetSpec::Trajectory(TrajectorySpec::default()),
        }
    }

    #[test]
    fn defaults_fill_in_from_minimal_json() {
        let json = r#"{
            "experiment": "superpixel",
            "model": "sat",
            "layers": 3,
            "channels": 8,
            "heads": 2,
            "activation": "relu",
            "dataset": {"kind": "superpixel"}
        }"#;
        let config = ExperimentConfig::from_json(json).unwrap();
        assert_eq!(config.epochs, 100);
        assert_eq!(config.batch_size(), 32);
        assert_eq!(config.learning_rate, 1e-3);
        assert_eq!(config.weight_decay, 5e-4);
        assert_eq!(config.seeds, vec![0, 1, 2, 3, 4]);
        assert!(!config.signed);
        match &config.dataset {
            DatasetSpec::Superpixel(spec) => assert_eq!(spec.train, 5000),
            _ => panic!("wrong dataset kind"),
        }
    }

    #[test]
    fn trajectory_batch_size_defaults_to_four() {
        assert_eq!(trajectory_config().batch_size(), 4);
    }

    #[test]
    fn config_roundtrips_through_json() {
        let config = trajectory_config();
        let back = ExperimentConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn mismatched_dataset_kind_is_rejected() {
        let mut config = trajectory_config();
        config.dataset = DatasetSpec::Superpixel(SuperpixelSpec::default());
        assert!(matches!(config.validate(), Err(TrainError::Config(_))));
    }

    #[test]
    fn vertex_models_cannot_run_the_trajectory_experiment() {
        let mut config = trajectory_config();
        config.model = ModelKind::Gcn;
        config.signed = false;
        config.heads = 1;
        assert!(matches!(config.validate(), Err(TrainError::Config(_))));
    }

    #[test]
    fn strict_validation_rejects_signed_relu_but_plain_allows_it() {
        let mut config = trajectory_config();
        config.activation = Activation::Relu;
        assert!(config.validate().is_ok());
        assert!(matches!(config.validate_strict(), Err(TrainError::Config(_))));
        config.activation = Activation::Tanh;
        assert!(config.validate_strict().is_ok());
    }

    #[test]
    fn signed_flag_is_attention_only() {
        let mut config = trajectory_config();
        config.model = ModelKind::Scn;
        assert!(matches!(config.validate(), Err(TrainError::Config(_))));
        config.signed = false;
        assert!(config.validate().is_ok());
    }

    #[test]
    fn input_widths_follow_experiment_and_model() {
        let config = trajectory_config();
        assert_eq!(config.input_widths(), BTreeMap::from([(1, 1)]));
        let mut scconv = config.clone();
        scconv.model = ModelKind::Scconv;
        assert_eq!(scconv.input_widths(), BTreeMap::from([(0, 1), (1, 1), (2, 1)]));
        let json = r#"{
            "experiment": "superpixel",
            "model": "gcn",
            "layers": 2,
            "channels": 35,
            "activation": "relu",
            "dataset": {"kind": "superpixel"}
        }"#;
        let gcn = ExperimentConfig::from_json(json).unwrap();
        assert_eq!(gcn.input_widths(), BTreeMap::from([(0, 3)]));
    }
}
