// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use fluxnet_core::devices::{merger_process, neuron_process, synapse_gate, MergerParams, NeuronParams, SynapseParams};
use fluxnet_core::netgraph::{Edge, InPort, NetworkSpec, NodeDecl, NodeKind};
use fluxnet_core::pulse::E_SWITCH_J;
use fluxnet_core::stream::node_seed;
use fluxnet_core::{energy_report, parse_netlist, simulate, simulate_driven, EngineConfig, PulseTrain};
use proptest::prelude::*;

fn arb_train(max: usize, horizon: f64) -> impl Strategy<Value = PulseTrain> {
    // quarter-ps grid so that coincidences across trains actually occur
    prop::collection::btree_set(0u32..(horizon as u32 * 4), 0..max)
        .prop_map(|s| PulseTrain::from_times(s.into_iter().map(|q| q as f64 / 4.0).collect()).unwrap())
}

fn neuron_spec(p: &NeuronParams) -> NetworkSpec {
    let mut s = NetworkSpec::new();
    s.add(NodeDecl::new(NodeKind::Source, "e").with("rate", 1.0));
    s.add(NodeDecl::new(NodeKind::Source, "i").with("rate", 1.0));
    s.add(
        NodeDecl::new(NodeKind::Neuron, "n")
            .with("theta", p.theta)
            .with("tau_leak", p.tau_leak)
            .with("t_ref", p.t_ref)
            .with("clamp_floor", p.clamp_floor),
    );
    s.add(NodeDecl::new(NodeKind::Probe, "p"));
    s.connect(Edge::new("e", "n").port(InPort::Exc));
    s.connect(Edge::new("i", "n").port(InPort::Inh));
    s.connect(Edge::new("n", "p"));
    s
}

const XOR_LIKE: &str = "\
set seed=9
set duration=4000ps
node source a rate=21GHz
node source b rate=13GHz phase=11ps process=poisson
node source c rate=8GHz
node splitter sa
node synapse s1 i_b=120uA
node synapse s2 i_b=160uA
node synapse s3 weight=0.8
node merger m t_dead=12ps
node neuron n1 theta=1.5 tau_leak=50ps t_ref=20ps
node neuron n2 theta=1 tau_leak=inf t_ref=5ps clamp_floor=-2
node probe p1
node probe p2
edge a sa
edge sa.0 s1
edge sa.1 s2
edge s1 m
edge b m
edge m n1.exc
edge s2 n1.inh
edge n1 n2.exc
edge c s3
edge s3 n2.inh
edge n2 p2
";

fn xor_like() -> NetworkSpec {
    let mut s = parse_netlist(XOR_LIKE).unwrap();
    // the engine may read n1 twice, so route it through a probe too
    s.edges.retain(|e| e.from != "n1");
    s.add(NodeDecl::new(NodeKind::Splitter, "sn"));
    s.connect(Edge::new("n1", "sn"));
    s.connect(Edge::new("sn", "n2").branch(0).port(InPort::Exc));
    s.connect(Edge::new("sn", "p1").branch(1));
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_neuron_matches_device_function(
        exc in arb_train(60, 400.0),
        inh in arb_train(30, 400.0),
        theta in 0.5f64..4.0,
        tau in prop_oneof![Just(f64::INFINITY), 5.0f64..200.0],
        t_ref in 0.0f64..30.0,
        floor in -3.0f64..0.0,
    ) {
        let p = NeuronParams { theta, tau_leak: tau, t_ref, clamp_floor: floor };
        let stim = BTreeMap::from([("e".to_string(), exc.clone()), ("i".to_string(), inh.clone())]);
        let cfg = EngineConfig { duration: 500.0, trace_states: true, ..EngineConfig::default() };
        let r = simulate_driven(&neuron_spec(&p), &cfg, &stim).unwrap();
        let want = neuron_process(&p, &exc, &inh);
        prop_assert_eq!(&r.probe_trains["p"], &want.output);
        prop_assert_eq!(&r.traces.unwrap()["n"].samples, &want.samples);
    }

    #[test]
    fn single_synapse_and_merger_match_device_functions(
        a in arb_train(80, 400.0),
        b in arb_train(80, 400.0),
        i_b in 40.0f64..260.0,
        t_dead in 0.0f64..40.0,
        seed in any::<u32>(),
    ) {
        let text = format!(
            "node source a rate=1GHz\nnode source b rate=1GHz\nnode synapse s i_b={i_b}uA\n\
             node merger m t_dead={t_dead}ps\nnode probe ps\nnode probe pm\n\
             edge a s\nedge s ps\nedge b m\nnode source c rate=1GHz\nedge c m\nedge m pm\n"
        );
        let spec = parse_netlist(&text).unwrap();
        let stim = BTreeMap::from([
            ("a".to_string(), a.clone()),
            ("b".to_string(), b.clone()),
            ("c".to_string(), a.clone()),
        ]);
        let cfg = EngineConfig { duration: 500.0, seed: seed as u64, ..EngineConfig::default() };
        let r = simulate_driven(&spec, &cfg, &stim).unwrap();
        let sp = SynapseParams { i_b, ..SynapseParams::default() };
        prop_assert_eq!(&r.probe_trains["ps"], &synapse_gate(&sp, &a, node_seed(seed as u64, "s")));
        prop_assert_eq!(&r.probe_trains["pm"], &merger_process(&MergerParams { t_dead }, &[b, a]));
    }

    #[test]
    fn result_is_independent_of_declaration_order(perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let base = xor_like();
        let mut shuffled = base.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
        shuffled.nodes.shuffle(&mut rng);
        shuffled.edges.shuffle(&mut rng);
        let cfg = EngineConfig::for_spec(&base);
        let a = simulate(&base, &cfg).unwrap();
        let b = simulate(&shuffled, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let s = xor_like();
    let cfg = EngineConfig { trace_states: true, ..EngineConfig::for_spec(&s) };
    let a = simulate(&s, &cfg).unwrap();
    let b = simulate(&s, &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.probe_trains["p2"].len() > 0);
    let other = simulate(&s, &EngineConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.probe_trains["p2"], other.probe_trains["p2"]);
}

#[test]
fn outputs_never_precede_their_causes() {
    let s = xor_like();
    let stim: BTreeMap<String, PulseTrain> = s
        .nodes_of(NodeKind::Source)
        .map(|n| {
            let period = 1000.0 / n.source_rate().unwrap();
            let times = (0..200).map(|k| 100.0 + k as f64 * period).collect();
            (n.name.clone(), PulseTrain::from_times(times).unwrap())
        })
        .collect();
    let r = simulate_driven(&s, &EngineConfig::for_spec(&s), &stim).unwrap();
    assert!(!r.probe_trains["p1"].is_empty());
    // nothing fires before the sources start; p1 also sits behind one splitter
    assert!(r.probe_trains["p1"].iter().all(|t| t >= 105.0));
    assert!(r.probe_trains["p2"].iter().all(|t| t >= 100.0));
}

#[test]
fn energy_is_switch_count_times_constant() {
    let s = xor_like();
    let r = simulate(&s, &EngineConfig::for_spec(&s)).unwrap();
    let e = energy_report(&r);
    assert_eq!(e.total_switches, e.per_node.values().sum::<u64>());
    assert_eq!(e.total_switches, r.switch_count);
    assert_eq!(e.total_joules, r.switch_count as f64 * E_SWITCH_J);
    assert_eq!(r.energy_j, e.total_joules);
    assert!(r.switch_count > 0);

    let empty = simulate(&NetworkSpec::new(), &EngineConfig::default()).unwrap();
    assert_eq!(energy_report(&empty).total_switches, 0);
    assert_eq!(energy_report(&empty).total_joules, 0.0);

    // 100 pulses through a transparent synapse
    let spec = parse_netlist("node source a rate=10GHz\nnode synapse s weight=1\nnode probe p\nedge a s\nedge s p\n").unwrap();
    let r = simulate(&spec, &EngineConfig { duration: 10_000.0, ..EngineConfig::default() }).unwrap();
    assert_eq!(r.probe_trains["p"].len(), 100);
    assert_eq!(r.node_switches["s"], 100);
    assert!((energy_report(&r).per_node["s"] as f64 * E_SWITCH_J - 2e-17).abs() < 1e-30);
}

#[test]
fn event_budget_is_enforced() {
    let s = xor_like();
    let cfg = EngineConfig { max_events: 50, ..EngineConfig::for_spec(&s) };
    assert!(matches!(simulate(&s, &cfg), Err(fluxnet_core::Error::EventBudget(_))));
}
