//! Structural properties of the attention layers: orientation
//! equivariance, coefficient normalization, the graph-attention
//! reduction, and finite-difference checks for every layer type.

mod common;

use common::layers::equivariance_violation;
use common::*;
use sat_core::nn::{sat_attention, AttentionHeadParams};
use sat_core::{
    Activation, BatchSample, BatchStructure, Graph, ModelKind, Network, NetworkSpec, ParamSet,
    SimplicialComplex, TaskKind,
};

const EQUIVARIANCE_TOLERANCE: f64 = 1e-9;

#[test]
fn signed_layers_commute_with_orientation_flips() {
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let (dim, activation) = match trial % 4 {
            0 => (1, Activation::Identity),
            1 => (1, Activation::Tanh),
            2 => (2, Activation::Identity),
            _ => (2, Activation::Tanh),
        };
        let violation = equivariance_violation(trial, dim, activation);
        assert!(
            violation < EQUIVARIANCE_TOLERANCE,
            "trial {trial}: violation {violation}"
        );
        worst = worst.max(violation);
    }
    assert!(worst < EQUIVARIANCE_TOLERANCE);
}

#[test]
fn relu_breaks_orientation_equivariance() {
    // an even nonlinearity inside the update destroys the symmetry; at
    // least one random instance must show a macroscopic violation
    let worst = (0..20u64)
        .map(|trial| equivariance_violation(trial, 1, Activation::Relu))
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "ReLU stayed equivariant to {worst}");
}

#[test]
fn trajectory_network_logits_are_flip_invariant() {
    let spec = NetworkSpec {
        kind: ModelKind::Sat,
        task: TaskKind::EdgeOrientation,
        input_widths: [(1, 1)].into_iter().collect(),
        layers: 3,
        hidden: 5,
        heads: 1,
        signed: true,
        bias: false,
        activation: Activation::Tanh,
        readout_hidden: 8,
        classes: 2,
        residual: true,
    };
    for trial in 0..20u64 {
        let mut r = rng(1000 + trial);
        let complex = complex_with_edges(&mut r);
        let features = features_for(&mut r, &complex, &[(1, 1)]);
        let mut params = ParamSet::new();
        let net = Network::build(&spec, &mut params, trial).unwrap();

        let run = |complex: &SimplicialComplex, features: &sat_core::CochainFeatures| {
            let samples = vec![BatchSample { complex, features }];
            let batch = BatchStructure::build(&samples, &net.batch_options()).unwrap();
            let mut g = Graph::new();
            let binding = params.bind(&mut g);
            let out = net.forward(&mut g, &binding, &batch).unwrap();
            g.value(out).to_vec()
        };
        let base = run(&complex, &features);
        let flip = random_flip(&mut r, 1, complex.num_simplices(1));
        let flipped = run(
            &complex.apply_flip(&flip).unwrap(),
            &features.apply_flip(&flip).unwrap(),
        );
        assert!(
            max_abs_diff(&base, &flipped) < EQUIVARIANCE_TOLERANCE,
            "trial {trial}"
        );
    }
}

#[test]
fn attention_magnitudes_sum_to_one_per_neighborhood() {
    for trial in 0..50u64 {
        let mut r = rng(2000 + trial);
        let complex = complex_with_edges(&mut r);
        let n = complex.num_simplices(1);
        let h = uniform_tensor(&mut r, n, 3);
        let w = uniform_tensor(&mut r, 3, 2);
        let a1 = uniform_tensor(&mut r, 2, 1);
        let a2 = uniform_tensor(&mut r, 2, 1);
        let table = complex.neighborhoods(1).unwrap();
        let signed = trial % 2 == 0;
        let coeff = sat_attention(
            &h,
            &table,
            AttentionHeadParams { weight: &w, a_target: &a1, a_source: &a2 },
            AttentionHeadParams { weight: &w, a_target: &a2, a_source: &a1 },
            signed,
        )
        .unwrap();
        for side in [&coeff.up, &coeff.down] {
            for (target, list) in side.iter().enumerate() {
                let total: f64 = list.iter().map(|e| e.alpha.abs()).sum();
                assert!(
                    (total - 1.0).abs() < 1e-9,
                    "trial {trial} target {target}: {total}"
                );
                let own = list.iter().find(|e| e.source == target).unwrap();
                assert!(own.alpha > 0.0, "self coefficient must stay positive");
            }
        }
    }
}

#[test]
fn gat_network_is_the_dim_zero_restriction_bit_for_bit() {
    let mut r = rng(77);
    // graphs only: no triangles, features on vertices
    let complex = sat_core::build_clique_complex(&random_graph(&mut r, 5, 8, 0.5), 1);
    let features = features_for(&mut r, &complex, &[(0, 3)]);
    let base = NetworkSpec {
        kind: ModelKind::Gat,
        task: TaskKind::Classification,
        input_widths: [(0, 3)].into_iter().collect(),
        layers: 2,
        hidden: 4,
        heads: 2,
        signed: false,
        bias: true,
        activation: Activation::Relu,
        readout_hidden: 6,
        classes: 10,
        residual: false,
    };
    let sat_spec = NetworkSpec {
        kind: ModelKind::Sat,
        ..base.clone()
    };

    let run = |spec: &NetworkSpec| {
        let mut params = ParamSet::new();
        let net = Network::build(spec, &mut params, 31).unwrap();
        let samples = vec![BatchSample { complex: &complex, features: &features }];
        let batch = BatchStructure::build(&samples, &net.batch_options()).unwrap();
        let mut g = Graph::new();
        let binding = params.bind(&mut g);
        let out = net.forward(&mut g, &binding, &batch).unwrap();
        g.value(out).to_vec()
    };
    let gat_logits = run(&base);
    let sat_logits = run(&sat_spec);
    assert_eq!(gat_logits, sat_logits);
}

#[test]
fn every_layer_type_passes_finite_difference_checks() {
    let (instances, worst) = common::layers::finite_difference_instances();
    assert!(instances >= 20, "only {instances} instances");
    assert!(worst < 1e-4, "worst relative error {worst}");
}
