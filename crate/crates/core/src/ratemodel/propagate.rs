// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::ops::Index;

use super::{merger_rate, ActivationModel};
use crate::devices::pass_probability;
use crate::error::{Error, Result};
use crate::netgraph::{topo_order, InPort, NetworkSpec, NodeKind};

/// Steady-state output rate of every node, GHz.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateVector(pub BTreeMap<String, f64>);

impl RateVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl Index<&str> for RateVector {
    type Output = f64;

    fn index(&self, name: &str) -> &f64 {
        &self.0[name]
    }
}

/// Same activation model for every neuron in `spec`.
pub fn uniform_models(spec: &NetworkSpec, model: ActivationModel) -> BTreeMap<String, ActivationModel> {
    spec.nodes_of(NodeKind::Neuron)
        .map(|n| (n.name.clone(), model))
        .collect()
}

/// Evaluates the rate model over an acyclic spec in topological order.
pub fn propagate_rates(
    spec: &NetworkSpec,
    models: &BTreeMap<String, ActivationModel>,
) -> Result<RateVector> {
    let order = topo_order(spec)?;
    let mut inputs: Vec<Vec<(InPort, f64)>> = vec![Vec::new(); spec.nodes.len()];
    let mut out = BTreeMap::new();
    let mut drivers: Vec<Vec<usize>> = vec![Vec::new(); spec.nodes.len()];
    for (ei, e) in spec.edges.iter().enumerate() {
        let from = spec
            .index_of(&e.from)
            .ok_or_else(|| Error::Contract(format!("unknown node `{}`", e.from)))?;
        drivers[from].push(ei);
    }
    for i in order {
        let n = &spec.nodes[i];
        let ins = &inputs[i];
        let sum = |port: Option<InPort>| -> f64 {
            ins.iter()
                .filter(|(p, _)| port.is_none_or(|q| *p == q))
                .map(|(_, r)| r)
                .sum()
        };
        let rate = match n.kind {
            NodeKind::Source => n.source_rate()?,
            NodeKind::Synapse => sum(None) * pass_probability(&n.synapse_params()?),
            NodeKind::Merger => {
                let rates: Vec<f64> = ins.iter().map(|(_, r)| *r).collect();
                merger_rate(n.merger_params()?.t_dead, &rates)
            }
            NodeKind::Splitter | NodeKind::Probe => sum(None),
            NodeKind::Neuron => {
                let model = models.get(&n.name).ok_or_else(|| {
                    Error::Contract(format!("no activation model for neuron `{}`", n.name))
                })?;
                model.eval(sum(Some(InPort::Exc)) - sum(Some(InPort::Inh)))
            }
        };
        for &ei in &drivers[i] {
            let e = &spec.edges[ei];
            let to = spec.index_of(&e.to).expect("edge target");
            inputs[to].push((e.port, rate));
        }
        out.insert(n.name.clone(), rate);
    }
    Ok(RateVector(out))
}
