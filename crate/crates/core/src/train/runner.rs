//! The training loop: mini-batch Adam over a prepared dataset, per-epoch
//! checkpoint selection, and deterministic evaluation.

use std::collections::HashMap;
use std::path::Path;
use std::rc::Rc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::complex::SimplicialComplex;
use crate::data::{cache, DatasetSpec};
use crate::nn::{BatchOptions, BatchSample, BatchStructure, CochainFeatures, Network};
use crate::tensor::{
    save_checkpoint, AdamConfig, AdamState, Graph, ParamSet, Tensor,
};

use super::config::ExperimentConfig;
use super::report::{EpochRecord, RunReport, SeedRun};
use super::TrainError;

const EVAL_BATCH: usize = 32;

/// A dataset turned into model-ready samples: one complex (shared where the
/// underlying data shares it) and input features per sample.
pub struct PreparedSample {
    pub complex: Rc<SimplicialComplex>,
    pub features: CochainFeatures,
    pub label: usize,
}

impl PreparedSample {
    fn as_batch_sample(&self) -> BatchSample<'_> {
        BatchSample { complex: &self.complex, features: &self.features }
    }
}

pub struct PreparedDataset {
    pub train: Vec<PreparedSample>,
    /// Empty for experiments without a validation split.
    pub val: Vec<PreparedSample>,
    pub test: Vec<PreparedSample>,
}

/// Materializes the config's dataset (through the cache) and adapts it to
/// training samples.
pub fn prepare(config: &ExperimentConfig, cache_root: &Path) -> Result<PreparedDataset, TrainError> {
    match &config.dataset {
        DatasetSpec::Superpixel(spec) => {
            let dataset = spec.load_or_build(cache_root)?;
            let adapt = |samples: Vec<crate::data::SuperpixelSample>| {
                samples
                    .into_iter()
                    .map(|s| PreparedSample {
                        complex: Rc::new(s.complex),
                        features: s.features,
                        label: s.label,
                    })
                    .collect()
            };
            Ok(PreparedDataset {
                train: adapt(dataset.train),
                val: adapt(dataset.val),
                test: adapt(dataset.test),
            })
        }
        DatasetSpec::Trajectory(spec) => {
            let dataset = spec.load_or_build(cache_root)?;
            let canonical = Rc::new(dataset.mesh.complex.clone());
            let features_for = |complex: &SimplicialComplex, chain: &[f64]| {
                let mut features = CochainFeatures::new();
                features.insert(0, Tensor::zeros(complex.num_simplices(0), 1));
                features.insert(
                    1,
                    Tensor::new(chain.len(), 1, chain.to_vec()).expect("one entry per edge"),
                );
                features.insert(2, Tensor::zeros(complex.num_simplices(2), 1));
                features
            };
            let train = dataset
                .train
                .iter()
                .map(|s| PreparedSample {
                    complex: Rc::clone(&canonical),
                    features: features_for(&canonical, &s.chain),
                    label: s.label,
                })
                .collect();
            let test = dataset
                .test
                .iter()
                .map(|s| {
                    let complex = Rc::new(dataset.mesh.complex.apply_flip(&s.flip)?);
                    Ok(PreparedSample {
                        features: features_for(&complex, &s.chain),
                        complex,
                        label: s.label,
                    })
                })
                .collect::<Result<Vec<_>, TrainError>>()?;
            Ok(PreparedDataset { train, test, val: Vec::new() })
        }
    }
}

/// Number of trainable scalars in the configured architecture.
pub fn count_params(config: &ExperimentConfig) -> Result<usize, TrainError> {
    let mut params = ParamSet::new();
    Network::build(&config.network_spec(), &mut params, 0)?;
    Ok(params.count_scalars())
}

/// Trains every seed in the config and writes per-seed checkpoints plus a
/// `report.json` into `out_dir` (when given).
pub fn train(
    config: &ExperimentConfig,
    cache_root: &Path,
    out_dir: Option<&Path>,
) -> Result<RunReport, TrainError> {
    config.validate()?;
    let data = prepare(config, cache_root)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let started = Instant::now();
    let mut runs = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let (run, params) = train_seed(config, &data, seed)?;
        if let Some(dir) = out_dir {
            let path = dir.join(format!("seed{seed}.ckpt"));
            save_checkpoint(&params, &config.to_json(), &path)?;
        }
        runs.push(run);
    }
    let report = RunReport::new(config.clone(), count_params(config)?, runs, started.elapsed());
    if let Some(dir) = out_dir {
        report.write(&dir.join("report.json"))?;
    }
    Ok(report)
}

/// Convenience wrapper using the process-wide cache root.
pub fn train_default_cache(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<RunReport, TrainError> {
    train(config, &cache::cache_root(), out_dir)
}

/// One full training run. Returns the per-epoch curve and the parameters of
/// the best epoch (by validation accuracy where a validation split exists,
/// running training accuracy otherwise).
pub fn train_seed(
    config: &ExperimentConfig,
    data: &PreparedDataset,
    seed: u64,
) -> Result<(SeedRun, ParamSet), TrainError> {
    let started = Instant::now();
    let mut params = ParamSet::new();
    let network = Network::build(&config.network_spec(), &mut params, seed)?;
    let options = network.batch_options();
    let adam_config = AdamConfig {
        lr: config.learning_rate,
        weight_decay: config.weight_decay,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::new(adam_config, &params);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed);
    let batch_size = config.batch_size();

    let val_batches = build_eval_batches(&data.val, &options)?;
    let mut templates: TemplateCache = HashMap::new();
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Vec<Tensor>)> = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut correct = 0usize;
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            let samples: Vec<BatchSample> =
                chunk.iter().map(|&i| data.train[i].as_batch_sample()).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| data.train[i].label).collect();
            let complexes: Vec<&Rc<SimplicialComplex>> =
                chunk.iter().map(|&i| &data.train[i].complex).collect();
            let structure = assemble(&mut templates, &complexes, &samples, &options)?;

            let mut g = Graph::new();
            let binding = params.bind(&mut g);
            let logits = network.forward(&mut g, &binding, &structure)?;
            let loss = g.cross_entropy(logits, &labels)?;
            g.backward(loss)?;
            params.clear_grads();
            params.accumulate_grads(&g, &binding);
            adam.step(&mut params)?;

            let (_, classes) = g.shape(logits);
            correct += count_correct(g.value(logits), classes, &labels);
            loss_sum += g.value(loss)[0];
            batches += 1;
        }
        let train_acc = correct as f64 / data.train.len() as f64;
        let train_loss = loss_sum / batches as f64;
        let val_acc = if data.val.is_empty() {
            None
        } else {
            Some(accuracy_over(&network, &params, &val_batches)?)
        };

        let metric = val_acc.unwrap_or(train_acc);
        let improved = best.as_ref().map_or(true, |(m, _, _)| metric > *m);
        if improved {
            best = Some((metric, epoch, snapshot(&params)));
        }
        curve.push(EpochRecord { epoch, train_loss, train_acc, val_acc });
    }

    let (_, best_epoch, values) = best.expect("at least one epoch ran");
    restore(&mut params, &values);
    let test_batches = build_eval_batches(&data.test, &options)?;
    let test_accuracy = accuracy_over(&network, &params, &test_batches)?;

    let run = SeedRun {
        seed,
        curve,
        best_epoch,
        test_accuracy,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    Ok((run, params))
}

/// Accuracy of an existing parameter set over a sample slice, batched.
pub fn evaluate_samples(
    network: &Network,
    params: &ParamSet,
    samples: &[PreparedSample],
) -> Result<f64, TrainError> {
    let batches = build_eval_batches(samples, &network.batch_options())?;
    accuracy_over(network, params, &batches)
}

type TemplateCache = HashMap<(usize, usize), BatchStructure>;

/// Builds the batch structure, reusing a cached template when every sample in
/// the batch shares one complex (the trajectory training set does).
fn assemble(
    templates: &mut TemplateCache,
    complexes: &[&Rc<SimplicialComplex>],
    samples: &[BatchSample],
    options: &BatchOptions,
) -> Result<BatchStructure, TrainError> {
    let first = complexes.first().expect("batches are non-empty");
    let shared = complexes.iter().all(|c| Rc::ptr_eq(c, first));
    if !shared {
        return Ok(BatchStructure::build(samples, options)?);
    }
    let key = (Rc::as_ptr(first) as usize, samples.len());
    if let Some(template) = templates.get(&key) {
        return Ok(template.with_inputs(samples)?);
    }
    let built = BatchStructure::build(samples, options)?;
    templates.insert(key, built.with_inputs(samples)?);
    Ok(built)
}

fn build_eval_batches(
    samples: &[PreparedSample],
    options: &BatchOptions,
) -> Result<Vec<(BatchStructure, Vec<usize>)>, TrainError> {
    let mut batches = Vec::new();
    for chunk in samples.chunks(EVAL_BATCH) {
        let batch: Vec<BatchSample> = chunk.iter().map(|s| s.as_batch_sample()).collect();
        let labels = chunk.iter().map(|s| s.label).collect();
        batches.push((BatchStructure::build(&batch, options)?, labels));
    }
    Ok(batches)
}

fn accuracy_over(
    network: &Network,
    params: &ParamSet,
    batches: &[(BatchStructure, Vec<usize>)],
) -> Result<f64, TrainError> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (structure, labels) in batches {
        let mut g = Graph::new();
        let binding = params.bind(&mut g);
        let logits = network.forward(&mut g, &binding, structure)?;
        let (_, classes) = g.shape(logits);
        correct += count_correct(g.value(logits), classes, labels);
        total += labels.len();
    }
    Ok(correct as f64 / total.max(1) as f64)
}

/// Argmax per row (first maximum wins) compared against the labels.
fn count_correct(logits: &[f64], classes: usize, labels: &[usize]) -> usize {
    labels
        .iter()
        .enumerate()
        .filter(|&(row, &label)| {
            let scores = &logits[row * classes..(row + 1) * classes];
            let mut arg = 0;
            for (c, &s) in scores.iter().enumerate() {
                if s > scores[arg] {
                    arg = c;
                }
            }
            arg == label
        })
        .count()
}

fn snapshot(params: &ParamSet) -> Vec<Tensor> {
    params.ids().map(|id| params.value(id).clone()).collect()
}

fn restore(params: &mut ParamSet, values: &[Tensor]) {
    let ids: Vec<_> = params.ids().collect();
    for (id, value) in ids.into_iter().zip(values) {
        *params.value_mut(id) = value.clone();
    }
}

/// A fast trajectory config shared by harness tests.
#[cfg(test)]
pub(crate) fn tiny_trajectory_config() -> ExperimentConfig {
    use crate::data::{MeshSpec, TrajectorySpec};
    use crate::nn::{Activation, ModelKind};
    use crate::train::ExperimentKind;

    ExperimentConfig {
        experiment: ExperimentKind::Trajectory,
        model: ModelKind::Sat,
        layers: 2,
        channels: 4,
        heads: 1,
        activation: Activation::Tanh,
        signed: true,
        residual: true,
        readout_hidden: 8,
        epochs: 2,
        batch_size: Some(4),
        learning_rate: 1e-3,
        weight_decay: 5e-4,
        seeds: vec![0],
        dataset: DatasetSpec::Trajectory(TrajectorySpec {
            mesh: MeshSpec { n_points: 120, seed: 3, ..MeshSpec::default() },
            train: 12,
            test: 8,
            split_seed: 7,
        }),
    }
}
