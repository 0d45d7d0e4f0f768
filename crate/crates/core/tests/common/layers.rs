//! Shared checks over the layer zoo: orientation equivariance of the signed
//! attention layer and finite-difference gradient verification of every
//! layer type. Used by both the property suite and the acceptance suite.

use std::collections::BTreeMap;

use rand::Rng;
use sat_core::nn::{
    GatLayer, GcnLayer, MlpHead, SatLayer, SatLayerSpec, ScconvLayer, ScconvLayerSpec, ScnLayer,
};
use sat_core::tensor::gradcheck::{check, GradCheckSettings};
use sat_core::{
    Activation, BatchOptions, BatchSample, BatchStructure, CochainFeatures, Graph, ModelKind,
    Network, NetworkSpec, NnError, ParamSet, SimplicialComplex, TaskKind,
};

use super::*;

pub fn single_sample_batch(
    complex: &SimplicialComplex,
    features: &CochainFeatures,
    dims: &[(usize, usize)],
    signed: bool,
) -> BatchStructure {
    let samples = vec![BatchSample { complex, features }];
    BatchStructure::build(
        &samples,
        &BatchOptions {
            dims: dims.iter().copied().collect(),
            signed,
        },
    )
    .expect("consistent sample")
}

/// Runs one signed attention layer on (complex, features) and on the
/// flipped pair, returning the worst deviation from equivariance.
pub fn equivariance_violation(seed: u64, dim: usize, activation: Activation) -> f64 {
    let mut rng = rng(seed);
    let complex = if dim == 2 {
        complex_with_triangles(&mut rng)
    } else {
        complex_with_edges(&mut rng)
    };
    let width = rng.gen_range(2..=4);
    let features = features_for(&mut rng, &complex, &[(dim, width)]);
    let spec = SatLayerSpec {
        dim,
        in_channels: width,
        out_channels: 3,
        heads: if seed % 2 == 0 { 1 } else { 2 },
        signed: true,
        bias: false,
        activation,
    };
    let mut params = ParamSet::new();
    let layer = SatLayer::new("layer0", spec, &mut params, seed).unwrap();

    let run = |complex: &SimplicialComplex, features: &CochainFeatures| {
        let batch = single_sample_batch(complex, features, &[(dim, width)], true);
        let mut g = Graph::new();
        let binding = params.bind(&mut g);
        let h = g.input(batch.inputs[&dim].clone());
        let out = layer.forward(&mut g, &binding, h, batch.dim(dim)).unwrap();
        let cols = g.shape(out).1;
        (g.value(out).to_vec(), cols)
    };

    let (base, cols) = run(&complex, &features);
    let flip = random_flip(&mut rng, dim, complex.num_simplices(dim));
    let flipped_complex = complex.apply_flip(&flip).unwrap();
    let flipped_features = features.apply_flip(&flip).unwrap();
    let (flipped_out, _) = run(&flipped_complex, &flipped_features);
    let expected = sign_rows(&base, cols, flip.signs());
    max_abs_diff(&flipped_out, &expected)
}

fn gradcheck_instance<F>(mut forward: F, params: &mut ParamSet) -> f64
where
    F: FnMut(&mut Graph, &sat_core::ParamBinding) -> Result<sat_core::Var, NnError>,
{
    let settings = GradCheckSettings::default();
    let report = check(
        params,
        |g, binding| -> Result<sat_core::Var, NnError> {
            let out = forward(g, binding)?;
            let squared = g.mul(out, out)?;
            Ok(g.mean_all(squared))
        },
        settings,
    )
    .unwrap();
    assert!(
        report.passes(&settings),
        "worst {} at {}[{}]",
        report.max_rel_err,
        report.worst_param,
        report.worst_index
    );
    report.max_rel_err
}

/// Central finite-difference checks on every layer type, the readout heads
/// and two whole networks. Returns (instances checked, worst relative error).
pub fn finite_difference_instances() -> (usize, f64) {
    let mut instances = 0;
    let mut worst: f64 = 0.0;

    // attention layers, signed and unsigned, all dimensions
    for (i, (dim, signed, heads, activation)) in [
        (1, true, 1, Activation::Identity),
        (1, true, 2, Activation::Tanh),
        (2, true, 1, Activation::Tanh),
        (2, true, 2, Activation::Identity),
        (0, false, 1, Activation::Relu),
        (0, false, 2, Activation::LeakyRelu),
        (1, false, 1, Activation::Tanh),
        (2, false, 2, Activation::Relu),
    ]
    .into_iter()
    .enumerate()
    {
        let mut r = rng(3000 + i as u64);
        let complex = if dim == 2 {
            complex_with_triangles(&mut r)
        } else {
            complex_with_edges(&mut r)
        };
        let width = 3;
        let features = features_for(&mut r, &complex, &[(dim, width)]);
        let batch = single_sample_batch(&complex, &features, &[(dim, width)], signed);
        let spec = SatLayerSpec {
            dim,
            in_channels: width,
            out_channels: 2,
            heads,
            signed,
            bias: !signed,
            activation,
        };
        let mut params = ParamSet::new();
        let layer = SatLayer::new("layer0", spec, &mut params, 3000 + i as u64).unwrap();
        worst = worst.max(gradcheck_instance(
            |g, binding| {
                let h = g.input(batch.inputs[&dim].clone());
                layer.forward(g, binding, h, batch.dim(dim))
            },
            &mut params,
        ));
        instances += 1;
    }

    // vertex baselines
    for i in 0..2 {
        let mut r = rng(3100 + i);
        let complex = complex_with_edges(&mut r);
        let features = features_for(&mut r, &complex, &[(0, 3)]);
        let batch = single_sample_batch(&complex, &features, &[(0, 3)], false);
        let mut params = ParamSet::new();
        let layer =
            GcnLayer::new("layer0", 3, 4, Activation::Relu, &mut params, 3100 + i).unwrap();
        worst = worst.max(gradcheck_instance(
            |g, binding| {
                let h = g.input(batch.inputs[&0].clone());
                layer.forward(g, binding, h, batch.dim(0))
            },
            &mut params,
        ));
        instances += 1;
    }
    for i in 0..2 {
        let mut r = rng(3200 + i);
        let complex = complex_with_edges(&mut r);
        let features = features_for(&mut r, &complex, &[(0, 3)]);
        let batch = single_sample_batch(&complex, &features, &[(0, 3)], false);
        let mut params = ParamSet::new();
        let layer = GatLayer::new(
            "layer0",
            3,
            2,
            2,
            true,
            Activation::LeakyRelu,
            &mut params,
            3200 + i,
        )
        .unwrap();
        worst = worst.max(gradcheck_instance(
            |g, binding| {
                let h = g.input(batch.inputs[&0].clone());
                layer.forward(g, binding, h, batch.dim(0))
            },
            &mut params,
        ));
        instances += 1;
    }

    // spectral convolutions on every dimension
    for (i, dim) in [0usize, 1, 2].into_iter().enumerate() {
        let mut r = rng(3300 + i as u64);
        let complex = complex_with_triangles(&mut r);
        let features = features_for(&mut r, &complex, &[(dim, 3)]);
        let batch = single_sample_batch(&complex, &features, &[(dim, 3)], false);
        let mut params = ParamSet::new();
        let layer =
            ScnLayer::new("layer0", 3, 3, Activation::Tanh, &mut params, 3300 + i as u64).unwrap();
        worst = worst.max(gradcheck_instance(
            |g, binding| {
                let h = g.input(batch.inputs[&dim].clone());
                layer.forward(g, binding, h, batch.dim(dim))
            },
            &mut params,
        ));
        instances += 1;
    }

    // coupled convolutions with cross-dimension terms
    let widths = [(0usize, 2usize), (1, 3), (2, 2)];
    for (i, dim) in [0usize, 1, 2].into_iter().enumerate() {
        let mut r = rng(3400 + i as u64);
        let complex = complex_with_triangles(&mut r);
        let features = features_for(&mut r, &complex, &widths);
        let batch = single_sample_batch(&complex, &features, &widths, false);
        let in_widths: BTreeMap<usize, usize> = widths.into_iter().collect();
        let spec = ScconvLayerSpec {
            in_channels: in_widths[&dim],
            out_channels: 2,
            has_down: dim > 0,
            has_up: dim < 2,
            in_below: dim.checked_sub(1).map(|b| in_widths[&b]),
            in_above: in_widths.get(&(dim + 1)).copied(),
            activation: Activation::Relu,
        };
        let mut params = ParamSet::new();
        let layer = ScconvLayer::new("layer0", spec, &mut params, 3400 + i as u64).unwrap();
        worst = worst.max(gradcheck_instance(
            |g, binding| {
                let below = dim.checked_sub(1).map(|b| g.input(batch.inputs[&b].clone()));
                let h = g.input(batch.inputs[&dim].clone());
                let above = batch.inputs.get(&(dim + 1)).map(|t| g.input(t.clone()));
                layer.forward(g, binding, below, h, above, batch.dim(dim))
            },
            &mut params,
        ));
        instances += 1;
    }

    // readout heads
    for i in 0..2u64 {
        let mut r = rng(3500 + i);
        let complex = complex_with_edges(&mut r);
        let features = features_for(&mut r, &complex, &[(1, 2)]);
        let batch = single_sample_batch(&complex, &features, &[(1, 2)], true);
        let mut params = ParamSet::new();
        let head = MlpHead::new("readout", 2, 3, 2, Activation::Relu, &mut params, i).unwrap();
        worst = worst.max(gradcheck_instance(
            |g, binding| {
                let h = g.input(batch.inputs[&1].clone());
                sat_core::nn::trajectory_readout(g, binding, h, &batch, &head)
            },
            &mut params,
        ));
        instances += 1;
    }

    // whole networks trained with the cross-entropy loss
    let network_checks = [
        (
            NetworkSpec {
                kind: ModelKind::Sat,
                task: TaskKind::Classification,
                input_widths: [(0, 2), (1, 2), (2, 2)].into_iter().collect(),
                layers: 2,
                hidden: 2,
                heads: 1,
                signed: false,
                bias: true,
                activation: Activation::Relu,
                readout_hidden: 3,
                classes: 4,
                residual: false,
            },
            3600u64,
            2usize,
        ),
        (
            NetworkSpec {
                kind: ModelKind::Sat,
                task: TaskKind::EdgeOrientation,
                input_widths: [(1, 1)].into_iter().collect(),
                layers: 2,
                hidden: 3,
                heads: 1,
                signed: true,
                bias: false,
                activation: Activation::Tanh,
                readout_hidden: 3,
                classes: 2,
                residual: true,
            },
            3700u64,
            1usize,
        ),
    ];
    for (spec, seed, label) in network_checks {
        let mut r = rng(seed);
        let complex = complex_with_triangles(&mut r);
        let dims: Vec<(usize, usize)> =
            spec.input_widths.iter().map(|(&d, &w)| (d, w)).collect();
        let features = features_for(&mut r, &complex, &dims);
        let mut params = ParamSet::new();
        let net = Network::build(&spec, &mut params, 8).unwrap();
        let samples = vec![BatchSample { complex: &complex, features: &features }];
        let batch = BatchStructure::build(&samples, &net.batch_options()).unwrap();
        let settings = GradCheckSettings::default();
        let report = check(
            &mut params,
            |g, binding| -> Result<sat_core::Var, NnError> {
                let logits = net.forward(g, binding, &batch)?;
                Ok(g.cross_entropy(logits, &[label])?)
            },
            settings,
        )
        .unwrap();
        assert!(report.passes(&settings), "network check: {}", report.max_rel_err);
        worst = worst.max(report.max_rel_err);
        instances += 1;
    }

    (instances, worst)
}
