// SPDX-License-Identifier: Apache-2.0

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::{Diagnostic, InPort, NetworkSpec, NodeKind};
use crate::error::{Error, Result};

/// Structural checks: parameters, port legality, drivers, fan-out and acyclicity.
pub fn validate(spec: &NetworkSpec) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in spec.nodes.iter().enumerate() {
        if index.insert(n.name.as_str(), i).is_some() {
            diags.push(Diagnostic::error("duplicate node name").about(&n.name).at(n.line));
        }
        if let Err(e) = n.check_params() {
            diags.push(Diagnostic::error(e.to_string()).about(&n.name).at(n.line));
        }
    }
    if !(spec.duration > 0.0) || !spec.duration.is_finite() {
        diags.push(Diagnostic::error(format!("duration {} must be positive", spec.duration)));
    }

    let mut out_degree: BTreeMap<(usize, Option<usize>), Vec<usize>> = BTreeMap::new();
    let mut in_degree: BTreeMap<(usize, InPort), Vec<usize>> = BTreeMap::new();
    for (ei, e) in spec.edges.iter().enumerate() {
        let label = format!("{} -> {}", e.from_label(), e.to);
        let err = |m: String| Diagnostic::error(m).about(label.clone()).at(e.line);
        let (Some(&fi), Some(&ti)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) else {
            diags.push(err("edge endpoint does not exist".into()));
            continue;
        };
        let (from, to) = (&spec.nodes[fi], &spec.nodes[ti]);
        if !from.kind.has_output() {
            diags.push(err(format!("{} `{}` has no output", from.kind, from.name)));
            continue;
        }
        if !to.kind.has_input() {
            diags.push(err(format!("{} `{}` has no input", to.kind, to.name)));
            continue;
        }
        match (from.kind, e.branch) {
            (NodeKind::Splitter, None) => {
                diags.push(err("splitter outputs must name a branch, e.g. `.0`".into()));
                continue;
            }
            (NodeKind::Splitter, Some(k)) if k >= from.fanout() => {
                diags.push(err(format!("branch {k} out of range for fanout {}", from.fanout())));
                continue;
            }
            (k, Some(_)) if k != NodeKind::Splitter => {
                diags.push(err(format!("{k} has a single output; branch selectors need a splitter")));
                continue;
            }
            _ => {}
        }
        let port_ok = match to.kind {
            NodeKind::Neuron => matches!(e.port, InPort::Exc | InPort::Inh),
            _ => e.port == InPort::Main,
        };
        if !port_ok {
            diags.push(err(format!("invalid input port for {} `{}`", to.kind, to.name)));
            continue;
        }
        out_degree.entry((fi, e.branch)).or_default().push(ei);
        in_degree.entry((ti, e.port)).or_default().push(ei);
    }

    for ((fi, branch), edges) in &out_degree {
        if edges.len() > 1 {
            let n = &spec.nodes[*fi];
            let label = match branch {
                Some(k) => format!("{}.{k}", n.name),
                None => n.name.clone(),
            };
            diags.push(
                Diagnostic::error(format!(
                    "output drives {} edges; fan-out requires splitter",
                    edges.len()
                ))
                .about(label)
                .at(spec.edges[edges[1]].line),
            );
        }
    }
    for ((ti, _), edges) in &in_degree {
        let n = &spec.nodes[*ti];
        if edges.len() > 1 && n.kind != NodeKind::Merger {
            diags.push(
                Diagnostic::error(format!(
                    "input has {} drivers; fan-in requires a merger",
                    edges.len()
                ))
                .about(&n.name)
                .at(spec.edges[edges[1]].line),
            );
        }
    }

    for (i, n) in spec.nodes.iter().enumerate() {
        let driven = |p: InPort| in_degree.contains_key(&(i, p));
        let undriven = match n.kind {
            NodeKind::Source => false,
            NodeKind::Neuron => !driven(InPort::Exc) && !driven(InPort::Inh),
            _ => !driven(InPort::Main),
        };
        if undriven {
            diags.push(Diagnostic::warning("input is not driven").about(&n.name).at(n.line));
        }
    }

    if let Err(cycle) = kahn(spec, &index) {
        let names: Vec<&str> = cycle.iter().map(|&i| spec.nodes[i].name.as_str()).collect();
        diags.push(
            Diagnostic::error(format!("graph is not acyclic; cycle involves {}", names.join(", ")))
                .about(names[0])
                .at(spec.nodes[cycle[0]].line),
        );
    }
    diags
}

/// Kahn's algorithm, breaking ties by declaration order. On failure returns
/// the nodes left with unresolved inputs.
fn kahn(spec: &NetworkSpec, index: &HashMap<&str, usize>) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = spec.nodes.len();
    let mut indeg = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &spec.edges {
        if let (Some(&a), Some(&b)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) {
            succ[a].push(b);
            indeg[b] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indeg[i] > 0).collect())
    }
}

/// Node indices in a deterministic topological order.
pub fn topo_order(spec: &NetworkSpec) -> Result<Vec<usize>> {
    let index: HashMap<&str, usize> = spec
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    kahn(spec, &index).map_err(|_| Error::Contract("network graph contains a cycle".into()))
}
