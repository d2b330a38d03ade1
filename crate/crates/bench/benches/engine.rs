// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, Criterion};
use fluxnet_bench::xor_network;
use fluxnet_core::devices::{neuron_process, NeuronParams};
use fluxnet_core::{parse_netlist, poisson_train, simulate, EngineConfig};
use std::hint::black_box;

fn engine(c: &mut Criterion) {
    let spec = xor_network(10_000.0);
    let cfg = EngineConfig::for_spec(&spec);
    c.bench_function("simulate_xor_10ns", |b| b.iter(|| simulate(black_box(&spec), &cfg).unwrap()));

    let text = spec.to_netlist();
    c.bench_function("parse_xor_netlist", |b| b.iter(|| parse_netlist(black_box(&text)).unwrap()));
}

fn neuron(c: &mut Criterion) {
    let exc = poisson_train(40.0, 100_000.0, 1).unwrap();
    let inh = poisson_train(10.0, 100_000.0, 2).unwrap();
    let p = NeuronParams::default();
    c.bench_function("neuron_process_100ns", |b| b.iter(|| neuron_process(&p, black_box(&exc), black_box(&inh))));
}

criterion_group!(benches, engine, neuron);
criterion_main!(benches);
