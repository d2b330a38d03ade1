// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use crate::devices::NeuronParams;
use crate::engine::{simulate, EngineConfig};
use crate::error::{invalid, Result};
use crate::netgraph::{Edge, InPort, NetworkSpec, NodeDecl, NodeKind, SourceProcess};

fn probe_spec(p: &NeuronParams, rate: f64, process: SourceProcess) -> NetworkSpec {
    let mut s = NetworkSpec::new();
    s.add(
        NodeDecl::new(NodeKind::Source, "in")
            .with("rate", rate)
            .with_word("process", process.as_str()),
    );
    s.add(
        NodeDecl::new(NodeKind::Neuron, "n")
            .with("theta", p.theta)
            .with("tau_leak", p.tau_leak)
            .with("t_ref", p.t_ref)
            .with("clamp_floor", p.clamp_floor),
    );
    s.add(NodeDecl::new(NodeKind::Probe, "out"));
    s.connect(Edge::new("in", "n").port(InPort::Exc));
    s.connect(Edge::new("n", "out"));
    s
}

/// Measured `(r_in, r_out)` pairs in GHz for regular input trains.
pub fn characterize_neuron(p: &NeuronParams, grid: &[f64], cfg: &EngineConfig) -> Result<Vec<(f64, f64)>> {
    characterize_neuron_with(p, grid, cfg, SourceProcess::Regular)
}

/// As [`characterize_neuron`] with a choice of input process. Grid points run
/// in parallel; each is an independent engine instance.
pub fn characterize_neuron_with(
    p: &NeuronParams,
    grid: &[f64],
    cfg: &EngineConfig,
    process: SourceProcess,
) -> Result<Vec<(f64, f64)>> {
    p.validate()?;
    if let Some(bad) = grid.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(invalid(format!("grid rate {bad} must be finite and >= 0")));
    }
    grid.par_iter()
        .map(|&r| {
            let res = simulate(&probe_spec(p, r, process), cfg)?;
            Ok((r, res.probe_rates["out"]))
        })
        .collect()
}
