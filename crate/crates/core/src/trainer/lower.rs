// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::MlpSpec;
use crate::devices::{bias_for_weight, MergerParams, NeuronParams, SplitterParams, SynapseParams};
use crate::error::{Error, Result};
use crate::netgraph::{expand_fanout, has_errors, validate, Edge, InPort, NetworkSpec, NodeDecl, NodeKind};
use crate::ratemodel::ActivationModel;

pub fn input_name(i: usize) -> String {
    format!("in{i}")
}

pub fn neuron_name(layer: usize, j: usize) -> String {
    format!("n{layer}_{j}")
}

pub fn output_name(j: usize) -> String {
    format!("out{j}")
}

fn bias_name(layer: usize, j: usize) -> String {
    format!("b{layer}_{j}")
}

/// Fractional phase offsets that keep regular sources from firing in lockstep.
fn input_phase_frac(i: usize, n: usize) -> f64 {
    i as f64 / n as f64
}

fn bias_phase_frac(k: usize) -> f64 {
    ((k + 1) as f64 * 0.618_033_988_749_894_9).fract()
}

fn source(name: String, rate_ghz: f64, frac: f64) -> NodeDecl {
    let d = NodeDecl::new(NodeKind::Source, name).with("rate", rate_ghz);
    if rate_ghz > 0.0 {
        d.with("phase", frac * 1000.0 / rate_ghz)
    } else {
        d
    }
}

fn neuron(name: String, np: &NeuronParams) -> NodeDecl {
    NodeDecl::new(NodeKind::Neuron, name)
        .with("theta", np.theta)
        .with("tau_leak", np.tau_leak)
        .with("t_ref", np.t_ref)
        .with("clamp_floor", np.clamp_floor)
}

/// Compiles a trained MLP into a validated netlist.
///
/// Each non-zero weight becomes one synapse on the target's excitatory or
/// inhibitory port; each non-zero bias becomes a regular source. Ports with
/// two or more drivers get a merger. Inputs are sources `in{i}` at rate 0
/// until [`apply_inputs`] sets them; outputs are probes `out{j}`.
pub fn lower_to_network(
    mlp: &MlpSpec,
    dev: &SynapseParams,
    np: &NeuronParams,
    mp: &MergerParams,
    sp: &SplitterParams,
) -> Result<NetworkSpec> {
    mlp.validate()?;
    dev.validate()?;
    np.validate()?;
    mp.validate()?;
    sp.validate()?;
    if mp.t_dead != mlp.t_dead {
        return Err(Error::Contract(format!(
            "merger dead time {} ps differs from the {} ps the model was trained with",
            mp.t_dead, mlp.t_dead
        )));
    }
    let mut s = NetworkSpec::new();
    let n_in = mlp.n_inputs();
    // name of the node carrying layer-k neuron i's output
    let out_of = |k: usize, i: usize| {
        if k == 0 && !mlp.normalizers {
            input_name(i)
        } else {
            neuron_name(k, i)
        }
    };
    for i in 0..n_in {
        s.add(source(input_name(i), 0.0, 0.0));
        if mlp.normalizers {
            s.add(neuron(neuron_name(0, i), np));
            s.connect(Edge::new(input_name(i), neuron_name(0, i)).port(InPort::Exc));
        }
    }
    let mut n_bias = 0;
    for (k, (w, b)) in mlp.weights.iter().zip(&mlp.biases).enumerate() {
        let layer = k + 1;
        for j in 0..mlp.sizes[layer] {
            let target = neuron_name(layer, j);
            s.add(neuron(target.clone(), np));
            // (driver node, port) pairs feeding this neuron
            let mut drivers: Vec<(String, InPort)> = Vec::new();
            for (i, row) in w.iter().enumerate() {
                let wij = row[j];
                if wij == 0.0 {
                    continue;
                }
                let name = format!("w{layer}_{i}_{j}");
                let i_b = bias_for_weight(dev, wij.abs())?;
                s.add(
                    NodeDecl::new(NodeKind::Synapse, name.clone())
                        .with("i_b", i_b)
                        .with("i_c", dev.i_c)
                        .with("i_center", dev.i_center)
                        .with("sigma_gz", dev.sigma_gz),
                );
                s.connect(Edge::new(out_of(k, i), name.clone()));
                drivers.push((name, if wij > 0.0 { InPort::Exc } else { InPort::Inh }));
            }
            let bj = b[j];
            if bj != 0.0 {
                let name = bias_name(layer, j);
                s.add(source(name.clone(), bj.abs() * mlp.rate_norm, bias_phase_frac(n_bias)));
                n_bias += 1;
                drivers.push((name, if bj > 0.0 { InPort::Exc } else { InPort::Inh }));
            }
            for port in [InPort::Exc, InPort::Inh] {
                let on_port: Vec<&String> = drivers.iter().filter(|(_, p)| *p == port).map(|(n, _)| n).collect();
                match on_port.as_slice() {
                    [] => {}
                    [one] => {
                        s.connect(Edge::new((*one).clone(), target.clone()).port(port));
                    }
                    many => {
                        let m = format!("m{layer}_{j}{}", if port == InPort::Exc { "e" } else { "i" });
                        s.add(NodeDecl::new(NodeKind::Merger, m.clone()).with("t_dead", mp.t_dead));
                        for d in many {
                            s.connect(Edge::new((*d).clone(), m.clone()));
                        }
                        s.connect(Edge::new(m, target.clone()).port(port));
                    }
                }
            }
        }
    }
    let last = mlp.sizes.len() - 1;
    for j in 0..mlp.n_outputs() {
        s.add(NodeDecl::new(NodeKind::Probe, output_name(j)));
        s.connect(Edge::new(neuron_name(last, j), output_name(j)));
    }
    let s = expand_fanout(&s, sp);
    let diags = validate(&s);
    if has_errors(&diags) {
        return Err(Error::Netlist(diags));
    }
    Ok(s)
}

/// Activation model for every neuron of a lowered network, keyed by name.
pub fn lowered_models(mlp: &MlpSpec) -> BTreeMap<String, ActivationModel> {
    let mut m = BTreeMap::new();
    let first = if mlp.normalizers { 0 } else { 1 };
    for (layer, &n) in mlp.sizes.iter().enumerate().skip(first) {
        for j in 0..n {
            m.insert(neuron_name(layer, j), mlp.activations[layer]);
        }
    }
    m
}

/// Sets the input sources of a lowered network to normalized rates.
pub fn apply_inputs(spec: &mut NetworkSpec, inputs: &[f64], rate_norm: f64) -> Result<()> {
    let n = inputs.len();
    let have = (0..).take_while(|&i| spec.node(&input_name(i)).is_some()).count();
    if have != n {
        return Err(Error::Dimension { expected: have, got: n });
    }
    for (i, &x) in inputs.iter().enumerate() {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(crate::error::invalid(format!("input {i} rate {x} must be >= 0")));
        }
        let node = spec.node_mut(&input_name(i)).expect("counted above");
        *node = source(input_name(i), x * rate_norm, input_phase_frac(i, n));
    }
    Ok(())
}
