// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashSet};

use super::{Edge, NetworkSpec, NodeDecl, NodeKind};
use crate::devices::SplitterParams;

/// Number of splitters in a minimal tree serving `sinks` leaves.
pub(crate) fn splitters_needed(sinks: usize, fanout: usize) -> usize {
    if sinks <= 1 {
        0
    } else {
        (sinks - 1).div_ceil(fanout - 1)
    }
}

/// Re-routes every output that drives more than one edge through a
/// minimal-depth splitter tree.
///
/// Splitters are laid out as a complete `fanout`-ary heap: splitter `i`
/// feeds splitters `fanout*i + 1 ..= fanout*i + fanout`, and the remaining
/// branch slots, shallowest first, feed the original sinks in edge order.
pub fn expand_fanout(spec: &NetworkSpec, sp: &SplitterParams) -> NetworkSpec {
    let fanout = sp.fanout.max(2);
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<usize>> = BTreeMap::new();
    for (ei, e) in spec.edges.iter().enumerate() {
        if let Some(fi) = spec.index_of(&e.from) {
            groups.entry((fi, e.branch)).or_default().push(ei);
        }
    }
    if groups.values().all(|g| g.len() <= 1) {
        return spec.clone();
    }

    let mut out = spec.clone();
    let mut taken: HashSet<String> = spec.nodes.iter().map(|n| n.name.clone()).collect();
    let mut fresh = |base: &str| {
        let mut k = 0;
        loop {
            let name = format!("{base}_fo{k}");
            if taken.insert(name.clone()) {
                return name;
            }
            k += 1;
        }
    };
    let mut drop = vec![false; spec.edges.len()];
    let mut added = Vec::new();

    for ((fi, branch), edges) in groups {
        if edges.len() <= 1 {
            continue;
        }
        let src = &spec.nodes[fi];
        let base = match branch {
            Some(k) => format!("{}_{k}", src.name),
            None => src.name.clone(),
        };
        let count = splitters_needed(edges.len(), fanout);
        let names: Vec<String> = (0..count).map(|_| fresh(&base)).collect();
        for name in &names {
            out.nodes.push(
                NodeDecl::new(NodeKind::Splitter, name.clone())
                    .with("delay", sp.delay)
                    .with("fanout", fanout as f64),
            );
        }
        added.push(Edge {
            from: src.name.clone(),
            branch,
            to: names[0].clone(),
            port: super::InPort::Main,
            line: None,
        });
        let mut sinks = edges.iter().map(|&ei| &spec.edges[ei]);
        for i in 0..count {
            for b in 0..fanout {
                let child = fanout * i + b + 1;
                if child < count {
                    added.push(Edge::new(names[i].clone(), names[child].clone()).branch(b));
                } else if let Some(orig) = sinks.next() {
                    added.push(Edge {
                        from: names[i].clone(),
                        branch: Some(b),
                        to: orig.to.clone(),
                        port: orig.port,
                        line: orig.line,
                    });
                }
            }
        }
        debug_assert!(sinks.next().is_none());
        for ei in edges {
            drop[ei] = true;
        }
    }

    out.edges = spec
        .edges
        .iter()
        .zip(&drop)
        .filter(|(_, d)| !**d)
        .map(|(e, _)| e.clone())
        .chain(added)
        .collect();
    out
}
