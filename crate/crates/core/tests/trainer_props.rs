// SPDX-License-Identifier: Apache-2.0

use fluxnet_core::devices::{pass_probability, MergerParams, NeuronParams, SplitterParams, SynapseParams};
use fluxnet_core::netgraph::{has_errors, validate, InPort, NodeKind};
use fluxnet_core::ratemodel::{propagate_rates, ActivationModel};
use fluxnet_core::trainer::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(rng: &mut ChaCha8Rng) -> ActivationModel {
    ActivationModel {
        r_sat: rng.random_range(20.0..60.0),
        r_thr: rng.random_range(-5.0..15.0),
        gain: rng.random_range(0.5..2.0),
        beta: rng.random_range(1.0..8.0),
    }
}

/// Parameters kept clear of zero, where a weight switches port and the
/// lowered topology (and so the surrogate) changes discontinuously.
fn random_mlp(rng: &mut ChaCha8Rng, sizes: &[usize]) -> MlpSpec {
    let acts = (0..sizes.len()).map(|_| random_model(rng)).collect();
    let mut m = MlpSpec::new(sizes, acts, rng.random_range(0.0..30.0)).unwrap();
    m.normalizers = rng.random_bool(0.5);
    let p: Vec<f64> = (0..m.params().len())
        .map(|_| {
            let v: f64 = rng.random_range(0.01..1.0);
            if rng.random_bool(0.5) { v } else { -v }
        })
        .collect();
    m.set_params(&p).unwrap();
    m
}

fn random_data(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> Dataset {
    let samples = (0..4)
        .map(|_| Sample {
            input: (0..n_in).map(|_| rng.random_range(0.0..2.0)).collect(),
            target: (0..n_out).map(|_| rng.random_range(0.0..1.5)).collect(),
        })
        .collect();
    Dataset::new(samples).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central differences with step 1e-4 against the analytic gradient.
fn gradient_rel_error(m: &MlpSpec, d: &Dataset) -> f64 {
    let (_, g) = m.loss_and_grad(d).unwrap();
    let p = m.params();
    let eps = 1e-4;
    let fd: Vec<f64> = (0..p.len())
        .map(|i| {
            let mut q = m.clone();
            let mut v = p.clone();
            v[i] = p[i] + eps;
            q.set_params(&v).unwrap();
            let up = q.loss(d).unwrap();
            v[i] = p[i] - eps;
            q.set_params(&v).unwrap();
            let dn = q.loss(d).unwrap();
            (up - dn) / (2.0 * eps)
        })
        .collect();
    let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&g).max(norm(&fd)).max(1e-300)
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let m = random_mlp(&mut rng, &[2, 3, 2]);
        let d = random_data(&mut rng, 2, 2);
        // fully saturated points have gradients near 1e-10, below the
        // roundoff floor of a 1e-4 central difference
        if norm(&m.loss_and_grad(&d).unwrap().1) < 1e-6 {
            continue;
        }
        worst = worst.max(gradient_rel_error(&m, &d));
        checked += 1;
    }
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

fn lower_default(m: &MlpSpec) -> fluxnet_core::NetworkSpec {
    lower_to_network(
        m,
        &SynapseParams::default(),
        &NeuronParams::default(),
        &MergerParams { t_dead: m.t_dead },
        &SplitterParams::default(),
    )
    .unwrap()
}

#[test]
fn lowered_rate_model_matches_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let mut m = random_mlp(&mut rng, &[2, 3, 2]);
        // exact zeros exercise omitted synapses
        m.weights[0][1][2] = 0.0;
        m.biases[1][0] = 0.0;
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..2.0)).collect();
        let mut s = lower_default(&m);
        apply_inputs(&mut s, &x, m.rate_norm).unwrap();
        let rates = propagate_rates(&s, &lowered_models(&m)).unwrap();
        let y = m.forward(&x).unwrap();
        for (j, yj) in y.iter().enumerate() {
            let got = rates[output_name(j).as_str()] / m.rate_norm;
            let rel = (got - yj).abs() / yj.abs().max(1e-12);
            assert!(rel <= 0.10 || (got - yj).abs() < 1e-9, "out{j}: lowered {got} vs forward {yj}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_weight_has_exactly_one_routed_synapse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mlp(&mut rng, &[2, 2, 1]);
        let s = lower_default(&m);
        prop_assert!(!has_errors(&validate(&s)));
        for (k, w) in m.weights.iter().enumerate() {
            for (i, row) in w.iter().enumerate() {
                for (j, &wij) in row.iter().enumerate() {
                    let name = format!("w{}_{i}_{j}", k + 1);
                    let syn = s.node(&name).expect("synapse present");
                    let pass = pass_probability(&syn.synapse_params().unwrap());
                    prop_assert!((pass - wij.abs()).abs() < 1e-9);
                    // the synapse reaches its neuron on exactly one port, possibly via a merger
                    let out: Vec<_> = s.edges.iter().filter(|e| e.from == name).collect();
                    prop_assert_eq!(out.len(), 1);
                    let target = format!("n{}_{j}", k + 1);
                    let port = if out[0].to == target {
                        out[0].port
                    } else {
                        s.edges.iter().find(|e| e.from == out[0].to && e.to == target).unwrap().port
                    };
                    prop_assert_eq!(port, if wij > 0.0 { InPort::Exc } else { InPort::Inh });
                }
            }
        }
    }
}

#[test]
fn xor_architecture_lowers_to_expected_structure() {
    let (mlp, data) = build_xor();
    assert_eq!(mlp.sizes, vec![2, 2, 1]);
    assert_eq!(mlp.biases.iter().flatten().count(), 3);
    assert_eq!(data.len(), 4);
    assert_eq!(data.samples[0].input, vec![LOGIC_LOW, LOGIC_LOW]);
    let mut m = mlp.clone();
    m.randomize(1);
    let d = XorDevices::default();
    let s = lower_to_network(&m, &d.synapse, &d.neuron, &d.merger, &d.splitter).unwrap();
    assert!(validate(&s).iter().all(|x| !x.is_error()));
    assert_eq!(s.nodes_of(NodeKind::Neuron).count(), 5);
    assert_eq!(s.nodes_of(NodeKind::Synapse).count(), 6);
    let bias = s.nodes_of(NodeKind::Source).filter(|n| n.name.starts_with('b')).count();
    assert_eq!(bias, 3);
    for n in ["n0_0", "n0_1"] {
        let e = s.edges.iter().find(|e| e.from == n).unwrap();
        assert_eq!(s.node(&e.to).unwrap().kind, NodeKind::Splitter, "{n}");
    }
}

#[test]
fn xor_trains_below_target_and_is_reproducible() {
    let (mlp, data) = build_xor();
    let cfg = TrainConfig { seed: Some(1), ..TrainConfig::default() };
    let a = train(&mlp, &data, &cfg).unwrap();
    assert!(a.final_loss() < 0.01, "loss {}", a.final_loss());
    assert!(a.epochs <= 5000);
    assert!(a.losses.iter().all(|l| l.is_finite()));
    let on = a.mlp.forward(&[LOGIC_HIGH, LOGIC_LOW]).unwrap()[0];
    let off = a.mlp.forward(&[LOGIC_HIGH, LOGIC_HIGH]).unwrap()[0];
    assert!(on >= 1.0 && off <= 0.5, "on {on} off {off}");
    let b = train(&mlp, &data, &cfg).unwrap();
    assert_eq!(a.mlp.params(), b.mlp.params());
    assert_eq!(a.mlp.to_text(), b.mlp.to_text());
}
