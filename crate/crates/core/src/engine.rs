// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event execution of a [`NetworkSpec`].
//!
//! Pending events sit in a binary heap ordered by
//! `(time, topological rank of target, port, sequence)`. Synapses, mergers
//! and neurons react with zero delay, so ordering targets by topological
//! rank guarantees every pulse a node will see at time `t` is queued before
//! the node handles its first pulse at `t`. Combined with the
//! inhibitory-before-excitatory port order this makes each device observe
//! exactly the input ordering its whole-train function uses.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use crate::devices::{
    pass_probability, MergerState, NeuronState, NeuronTrace, Polarity, SynapseGate,
};
use crate::error::{Error, Result};
use crate::netgraph::{has_errors, topo_order, validate, InPort, NetworkSpec, NodeKind, SourceProcess};
use crate::pulse::{measure_rate, poisson_train, regular_train, PulseTrain, E_SWITCH_J};
use crate::stream::node_seed;

pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;
pub const DEFAULT_TRANSIENT_SKIP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub duration: f64,
    pub seed: u64,
    /// Leading fraction of the run excluded from rate measurement.
    pub transient_skip_fraction: f64,
    pub trace_states: bool,
    pub max_events: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            duration: crate::netgraph::DEFAULT_DURATION_PS,
            seed: 0,
            transient_skip_fraction: DEFAULT_TRANSIENT_SKIP,
            trace_states: false,
            max_events: DEFAULT_EVENT_CAP,
        }
    }
}

impl EngineConfig {
    /// Takes duration and seed from the netlist's `set` directives.
    pub fn for_spec(spec: &NetworkSpec) -> Self {
        Self {
            duration: spec.duration,
            seed: spec.seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidArgument(format!("duration {} must be > 0", self.duration)));
        }
        if !(0.0..1.0).contains(&self.transient_skip_fraction) {
            return Err(Error::InvalidArgument(format!(
                "transient skip {} must lie in [0, 1)",
                self.transient_skip_fraction
            )));
        }
        Ok(())
    }

    /// Steady-state measurement window.
    pub fn window(&self) -> (f64, f64) {
        (self.transient_skip_fraction * self.duration, self.duration)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub probe_trains: BTreeMap<String, PulseTrain>,
    /// Steady-state rate per probe, GHz.
    pub probe_rates: BTreeMap<String, f64>,
    pub switch_count: u64,
    pub energy_j: f64,
    pub node_switches: BTreeMap<String, u64>,
    pub traces: Option<BTreeMap<String, NeuronTrace>>,
    pub events_processed: u64,
    pub window: (f64, f64),
}

impl SimResult {
    pub fn rate(&self, probe: &str) -> Option<f64> {
        self.probe_rates.get(probe).copied()
    }

    /// `probe,rate_ghz` CSV.
    pub fn rates_csv(&self) -> String {
        let mut s = String::from("probe,rate_ghz\n");
        for (k, v) in &self.probe_rates {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub per_node: BTreeMap<String, u64>,
    pub total_switches: u64,
    pub total_joules: f64,
}

/// Junction-switch accounting of a finished run.
pub fn energy_report(result: &SimResult) -> EnergyReport {
    let total: u64 = result.node_switches.values().sum();
    EnergyReport {
        per_node: result.node_switches.clone(),
        total_switches: total,
        total_joules: total as f64 * E_SWITCH_J,
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    rank: usize,
    port: InPort,
    seq: u64,
}

fn port_priority(p: InPort) -> u8 {
    match p {
        InPort::Inh => 0,
        InPort::Exc => 1,
        InPort::Main => 2,
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank.cmp(&other.rank))
            .then(port_priority(self.port).cmp(&port_priority(other.port)))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

enum Device {
    Source,
    Synapse(SynapseGate),
    Merger(MergerState),
    Splitter { delay: f64, fanout: usize },
    Neuron(NeuronState),
    Probe,
}

struct Node {
    name: String,
    device: Device,
    /// Downstream `(rank, port)` per output branch.
    outputs: Vec<Option<(usize, InPort)>>,
    switches: u64,
}

struct Sim<'a> {
    cfg: &'a EngineConfig,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl Sim<'_> {
    fn push(&mut self, time: f64, rank: usize, port: InPort) {
        if time < self.cfg.duration {
            self.seq += 1;
            self.queue.push(Reverse(Event {
                time,
                rank,
                port,
                seq: self.seq,
            }));
        }
    }
}

/// Runs `spec` to `cfg.duration`.
///
/// The spec must validate without errors; otherwise the diagnostics are
/// returned as [`Error::Netlist`].
pub fn simulate(spec: &NetworkSpec, cfg: &EngineConfig) -> Result<SimResult> {
    simulate_driven(spec, cfg, &BTreeMap::new())
}

/// As [`simulate`], but each source named in `stimuli` emits the given train
/// (truncated to the run duration) instead of its declared process.
pub fn simulate_driven(
    spec: &NetworkSpec,
    cfg: &EngineConfig,
    stimuli: &BTreeMap<String, PulseTrain>,
) -> Result<SimResult> {
    cfg.validate()?;
    if let Some(name) = stimuli.keys().find(|n| spec.node(n).map(|d| d.kind) != Some(NodeKind::Source)) {
        return Err(Error::InvalidArgument(format!("stimulus `{name}` does not name a source")));
    }
    let diags = validate(spec);
    if has_errors(&diags) {
        return Err(Error::Netlist(diags));
    }
    let order = topo_order(spec)?;
    let mut rank_of = vec![0usize; spec.nodes.len()];
    for (rank, &i) in order.iter().enumerate() {
        rank_of[i] = rank;
    }

    let mut nodes = Vec::with_capacity(order.len());
    let mut sources = Vec::new();
    for &i in &order {
        let decl = &spec.nodes[i];
        let device = match decl.kind {
            NodeKind::Source => {
                let rate = decl.source_rate()?;
                let train = match (stimuli.get(&decl.name), decl.source_process()?) {
                    (Some(t), _) => PulseTrain::from_times(t.iter().take_while(|&x| x < cfg.duration).collect())?,
                    (None, SourceProcess::Regular) => regular_train(rate, cfg.duration, decl.source_phase())?,
                    (None, SourceProcess::Poisson) => {
                        poisson_train(rate, cfg.duration, node_seed(cfg.seed, &decl.name))?
                    }
                };
                sources.push((rank_of[i], train));
                Device::Source
            }
            NodeKind::Synapse => Device::Synapse(SynapseGate::new(
                pass_probability(&decl.synapse_params()?),
                node_seed(cfg.seed, &decl.name),
            )),
            NodeKind::Merger => Device::Merger(MergerState::new(decl.merger_params()?)),
            NodeKind::Splitter => {
                let p = decl.splitter_params()?;
                Device::Splitter {
                    delay: p.delay,
                    fanout: p.fanout,
                }
            }
            NodeKind::Neuron => Device::Neuron(NeuronState::new(decl.neuron_params()?)),
            NodeKind::Probe => Device::Probe,
        };
        let width = match &device {
            Device::Splitter { fanout, .. } => *fanout,
            Device::Probe => 0,
            _ => 1,
        };
        nodes.push(Node {
            name: decl.name.clone(),
            device,
            outputs: vec![None; width],
            switches: 0,
        });
    }
    for e in &spec.edges {
        let from = rank_of[spec.index_of(&e.from).expect("validated")];
        let to = rank_of[spec.index_of(&e.to).expect("validated")];
        nodes[from].outputs[e.branch.unwrap_or(0)] = Some((to, e.port));
    }

    let mut sim = Sim {
        cfg,
        queue: BinaryHeap::new(),
        seq: 0,
    };
    for (rank, train) in &sources {
        for t in train.iter() {
            sim.push(t, *rank, InPort::Main);
        }
    }

    let mut probes: BTreeMap<usize, Vec<f64>> = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| matches!(n.device, Device::Probe))
        .map(|(r, _)| (r, Vec::new()))
        .collect();
    let mut traces: BTreeMap<usize, NeuronTrace> = BTreeMap::new();
    let mut neuron_out: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut processed = 0u64;

    while let Some(Reverse(ev)) = sim.queue.pop() {
        processed += 1;
        if processed > cfg.max_events {
            return Err(Error::EventBudget(cfg.max_events));
        }
        let node = &mut nodes[ev.rank];
        let t = ev.time;
        // (delay, emitted) for the node's outputs
        let emit: Option<f64> = match &mut node.device {
            Device::Source => Some(0.0),
            Device::Synapse(gate) => {
                node.switches += 1;
                gate.admit().then_some(0.0)
            }
            Device::Merger(gate) => {
                let ok = gate.admit(t);
                if ok {
                    node.switches += 1;
                }
                ok.then_some(0.0)
            }
            Device::Splitter { delay, fanout } => {
                node.switches += *fanout as u64;
                Some(*delay)
            }
            Device::Neuron(state) => {
                let polarity = match ev.port {
                    InPort::Inh => Polarity::Inhibitory,
                    _ => Polarity::Excitatory,
                };
                let step = state.step(t, polarity);
                node.switches += 1 + step.fired as u64;
                if cfg.trace_states {
                    let tr = traces.entry(ev.rank).or_default();
                    tr.samples.push((t, step.before));
                    tr.samples.push((t, step.after));
                }
                if step.fired {
                    neuron_out.entry(ev.rank).or_default().push(t);
                }
                step.fired.then_some(0.0)
            }
            Device::Probe => {
                probes.get_mut(&ev.rank).expect("probe").push(t);
                None
            }
        };
        if let Some(delay) = emit {
            for (to, port) in node.outputs.clone().into_iter().flatten() {
                sim.push(t + delay, to, port);
            }
        }
    }

    let (start, end) = cfg.window();
    let mut probe_trains = BTreeMap::new();
    let mut probe_rates = BTreeMap::new();
    for (rank, times) in probes {
        let train = PulseTrain::from_times(times)?;
        probe_rates.insert(nodes[rank].name.clone(), measure_rate(&train, start, end)?.rate_ghz);
        probe_trains.insert(nodes[rank].name.clone(), train);
    }
    let traces = cfg.trace_states.then(|| {
        nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.device, Device::Neuron(_)))
            .map(|(r, n)| {
                let mut tr = traces.remove(&r).unwrap_or_default();
                tr.output = PulseTrain::from_sorted_unchecked(neuron_out.remove(&r).unwrap_or_default());
                (n.name.clone(), tr)
            })
            .collect()
    });
    let node_switches: BTreeMap<String, u64> =
        nodes.iter().map(|n| (n.name.clone(), n.switches)).collect();
    let switch_count = node_switches.values().sum();
    Ok(SimResult {
        probe_trains,
        probe_rates,
        switch_count,
        energy_j: switch_count as f64 * E_SWITCH_J,
        node_switches,
        traces,
        events_processed: processed,
        window: (start, end),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{merger_process, neuron_process, synapse_gate, MergerParams, NeuronParams, SynapseParams};
    use crate::netgraph::{parse_netlist, Edge, NodeDecl};

    fn run(text: &str) -> SimResult {
        let spec = parse_netlist(text).unwrap();
        simulate(&spec, &EngineConfig::for_spec(&spec)).unwrap()
    }

    #[test]
    fn passthrough_rate() {
        let r = run("node source a rate=33.3GHz\nnode probe p\nedge a p\n");
        let rate = r.rate("p").unwrap();
        assert!((rate - 33.3).abs() <= 1000.0 / 8000.0 + 1e-9, "{rate}");
        assert_eq!(r.switch_count, 0);
    }

    #[test]
    fn synapse_matches_device_function() {
        let r = run("set seed=17\nnode source a rate=50GHz\nnode synapse s i_b=100uA\nnode probe p\nedge a s\nedge s p\n");
        let input = regular_train(50.0, 10_000.0, 0.0).unwrap();
        let p = SynapseParams::default().with_bias(100.0);
        let expected = synapse_gate(&p, &input, node_seed(17, "s"));
        assert_eq!(r.probe_trains["p"], expected);
        assert_eq!(r.node_switches["s"], 500);
    }

    #[test]
    fn neuron_and_merger_match_device_functions() {
        let text = "set seed=3\n\
            node source a rate=40GHz\nnode source b rate=25GHz phase=7ps\nnode source c rate=9GHz\n\
            node merger m t_dead=12ps\n\
            node neuron n theta=1.5 tau_leak=40ps t_ref=20ps\n\
            node probe pm\nnode probe pn\nnode splitter sp delay=0ps\n\
            edge a m\nedge b m\nedge m sp\nedge sp.0 pm\nedge sp.1 n.exc\nedge c n.inh\nedge n pn\n";
        let r = run(text);
        let a = regular_train(40.0, 10_000.0, 0.0).unwrap();
        let b = regular_train(25.0, 10_000.0, 7.0).unwrap();
        let c = regular_train(9.0, 10_000.0, 0.0).unwrap();
        let merged = merger_process(&MergerParams { t_dead: 12.0 }, &[a, b]);
        assert_eq!(r.probe_trains["pm"], merged);
        let np = NeuronParams { theta: 1.5, tau_leak: 40.0, t_ref: 20.0, clamp_floor: 0.0 };
        let out = neuron_process(&np, &merged, &c).output;
        assert_eq!(r.probe_trains["pn"], out);
        let n_in = (merged.len() + c.len()) as u64;
        assert_eq!(r.node_switches["n"], n_in + out.len() as u64);
        assert_eq!(r.node_switches["m"], merged.len() as u64);
        assert_eq!(r.node_switches["sp"], 2 * merged.len() as u64);
    }

    #[test]
    fn driven_sources_replace_declared_process() {
        let spec = parse_netlist("node source a rate=1GHz\nnode probe p\nedge a p\n").unwrap();
        let cfg = EngineConfig { duration: 100.0, ..EngineConfig::default() };
        let train = PulseTrain::from_times(vec![3.0, 4.5, 99.0, 150.0]).unwrap();
        let stim = BTreeMap::from([("a".to_string(), train)]);
        let r = simulate_driven(&spec, &cfg, &stim).unwrap();
        assert_eq!(r.probe_trains["p"].times(), &[3.0, 4.5, 99.0]);
        let stim = BTreeMap::from([("p".to_string(), PulseTrain::new())]);
        assert!(simulate_driven(&spec, &cfg, &stim).is_err());
    }

    #[test]
    fn splitter_delays_accumulate() {
        let r = run(
            "node source a rate=1GHz\nnode splitter s1\nnode splitter s2 delay=7ps\nnode probe p\n\
             edge a s1\nedge s1.1 s2\nedge s2.0 p\n",
        );
        assert_eq!(r.probe_trains["p"].times()[0], 12.0);
    }

    #[test]
    fn rejects_invalid_spec() {
        let spec = parse_netlist("node source a rate=1GHz\nnode probe p\nnode probe q\nedge a p\nedge a q\n").unwrap();
        assert!(matches!(simulate(&spec, &EngineConfig::default()), Err(Error::Netlist(_))));
    }

    #[test]
    fn event_cap() {
        let spec = parse_netlist("node source a rate=50GHz\nnode probe p\nedge a p\n").unwrap();
        let cfg = EngineConfig { max_events: 10, ..EngineConfig::default() };
        assert!(matches!(simulate(&spec, &cfg), Err(Error::EventBudget(10))));
    }

    #[test]
    fn coincident_inputs_independent_of_declaration_order() {
        let make = |flip: bool| {
            let mut s = NetworkSpec::new();
            let mut srcs = vec![
                NodeDecl::new(NodeKind::Source, "x").with("rate", 20.0),
                NodeDecl::new(NodeKind::Source, "y").with("rate", 20.0),
            ];
            if flip {
                srcs.reverse();
            }
            for n in srcs {
                s.add(n);
            }
            s.add(NodeDecl::new(NodeKind::Neuron, "n").with("theta", 1.5).with("tau_leak", f64::INFINITY).with("t_ref", 0.0));
            s.add(NodeDecl::new(NodeKind::Probe, "p"));
            s.connect(Edge::new("x", "n").port(InPort::Exc));
            s.connect(Edge::new("y", "n").port(InPort::Inh));
            s.connect(Edge::new("n", "p"));
            simulate(&s, &EngineConfig::default()).unwrap()
        };
        let (a, b) = (make(false), make(true));
        assert_eq!(a.probe_trains, b.probe_trains);
        // inhibitory pulse lands first each time, so the neuron never fires
        assert!(a.probe_trains["p"].is_empty());
    }

    #[test]
    fn energy_is_switches_times_constant() {
        let r = run("node source a rate=10GHz\nnode synapse s weight=1\nnode probe p\nedge a s\nedge s p\n");
        let rep = energy_report(&r);
        assert_eq!(rep.total_switches, 100);
        assert!((rep.total_joules - 2e-17).abs() < 1e-30);
        assert_eq!(rep.per_node.values().sum::<u64>(), rep.total_switches);
        let empty = energy_report(&run(""));
        assert_eq!(empty.total_switches, 0);
        assert_eq!(empty.total_joules, 0.0);
    }

    #[test]
    fn traces_recorded_on_request() {
        let spec = parse_netlist(
            "node source a rate=30GHz\nnode neuron n theta=2 tau_leak=50ps t_ref=10ps\nnode probe p\nedge a n\nedge n p\n",
        )
        .unwrap();
        let cfg = EngineConfig { trace_states: true, duration: 1000.0, ..EngineConfig::default() };
        let r = simulate(&spec, &cfg).unwrap();
        let tr = &r.traces.as_ref().unwrap()["n"];
        assert_eq!(tr.samples.len(), 2 * 30);
        assert_eq!(tr.output, r.probe_trains["p"]);
        assert!(tr.to_csv().starts_with("t_ps,state\n"));
    }

    #[test]
    fn deterministic_runs() {
        let text = "set seed=5\nnode source a rate=30GHz process=poisson\nnode synapse s weight=0.4\nnode probe p\nedge a s\nedge s p\n";
        assert_eq!(run(text), run(text));
    }
}
