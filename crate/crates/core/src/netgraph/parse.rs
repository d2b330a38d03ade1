// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::{param_dim, Diagnostic, Dim, Edge, InPort, NetworkSpec, NodeDecl, NodeKind, ParamValue};

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `12.5GHz` into `(12.5, "GHz")`.
fn split_quantity(s: &str) -> Option<(f64, &str)> {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i == digits_start {
        return None;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    let value = s[..i].parse::<f64>().ok()?;
    Some((value, &s[i..]))
}

fn unit_scale(dim: Dim, unit: &str) -> Option<f64> {
    match (dim, unit) {
        (Dim::Time, "ps") => Some(1.0),
        (Dim::Time, "ns") => Some(1e3),
        (Dim::Rate, "GHz") => Some(1.0),
        (Dim::Rate, "MHz") => Some(1e-3),
        (Dim::Current, "uA") | (Dim::Current, "µA") => Some(1.0),
        (Dim::Current, "mA") => Some(1e3),
        (Dim::Current, "nA") => Some(1e-3),
        _ => None,
    }
}

pub(crate) fn parse_value(dim: Dim, raw: &str) -> Result<ParamValue, String> {
    match dim {
        Dim::Word => {
            if is_ident(raw) {
                Ok(ParamValue::Word(raw.to_string()))
            } else {
                Err(format!("`{raw}` is not an identifier"))
            }
        }
        Dim::Count => raw
            .parse::<u64>()
            .map(|v| ParamValue::Num(v as f64))
            .map_err(|_| format!("`{raw}` is not a non-negative integer")),
        Dim::Scalar => match split_quantity(raw) {
            Some((v, "")) => Ok(ParamValue::Num(v)),
            Some((_, unit)) => Err(format!("`{raw}`: dimensionless value takes no unit (found `{unit}`)")),
            None => Err(format!("`{raw}` is not a number")),
        },
        Dim::Time | Dim::Rate | Dim::Current => {
            if dim == Dim::Time && raw == "inf" {
                return Ok(ParamValue::Num(f64::INFINITY));
            }
            match split_quantity(raw) {
                Some((_, "")) => Err(format!(
                    "`{raw}` needs a unit (expected e.g. `{raw}{}`)",
                    dim.canonical_unit()
                )),
                Some((v, unit)) => unit_scale(dim, unit)
                    .map(|s| ParamValue::Num(v * s))
                    .ok_or_else(|| format!("`{raw}`: unknown unit `{unit}`")),
                None => Err(format!("`{raw}` is not a number with unit")),
            }
        }
    }
}

struct RawEdge {
    from: String,
    from_port: Option<String>,
    to: String,
    to_port: Option<String>,
    line: usize,
}

fn split_port(s: &str) -> (&str, Option<&str>) {
    match s.split_once('.') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    }
}

/// Parses netlist text. Every diagnostic carries its 1-based line number.
///
/// Syntax errors, duplicate names, unknown kinds or keys, malformed
/// quantities and edges naming undeclared nodes are reported here; the
/// structural rules live in [`validate`](super::validate).
pub fn parse_netlist(text: &str) -> Result<NetworkSpec, Vec<Diagnostic>> {
    let mut spec = NetworkSpec::new();
    let mut diags = Vec::new();
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut raw_edges = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let body = full.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some((&head, rest)) = toks.split_first() else {
            continue;
        };
        let err = |msg: String| Diagnostic::error(msg).at(Some(line));
        match head {
            "set" => {
                if rest.is_empty() {
                    diags.push(err("`set` needs key=value".into()));
                }
                for kv in rest {
                    let Some((k, v)) = kv.split_once('=') else {
                        diags.push(err(format!("expected key=value, found `{kv}`")));
                        continue;
                    };
                    match k {
                        "seed" => match v.parse::<u64>() {
                            Ok(s) => spec.seed = s,
                            Err(_) => diags.push(err(format!("seed `{v}` is not a non-negative integer"))),
                        },
                        "duration" => match parse_value(Dim::Time, v) {
                            Ok(ParamValue::Num(d)) if d > 0.0 && d.is_finite() => spec.duration = d,
                            Ok(_) => diags.push(err(format!("duration `{v}` must be positive and finite"))),
                            Err(m) => diags.push(err(m)),
                        },
                        other => diags.push(err(format!("unknown setting `{other}`"))),
                    }
                }
            }
            "node" => {
                if rest.len() < 2 {
                    diags.push(err("expected `node <kind> <name> [key=value ...]`".into()));
                    continue;
                }
                let Some(kind) = NodeKind::parse(rest[0]) else {
                    diags.push(err(format!("unknown node kind `{}`", rest[0])));
                    continue;
                };
                let name = rest[1];
                if !is_ident(name) {
                    diags.push(err(format!("`{name}` is not a valid identifier")));
                    continue;
                }
                if let Some(prev) = names.get(name) {
                    diags.push(
                        err(format!("duplicate node name (first declared on line {prev})")).about(name),
                    );
                    continue;
                }
                let mut node = NodeDecl::new(kind, name);
                node.line = Some(line);
                let mut ok = true;
                for kv in &rest[2..] {
                    let Some((k, v)) = kv.split_once('=') else {
                        diags.push(err(format!("expected key=value, found `{kv}`")).about(name));
                        ok = false;
                        continue;
                    };
                    let Some(dim) = param_dim(kind, k) else {
                        diags.push(err(format!("{kind} has no parameter `{k}`")).about(name));
                        ok = false;
                        continue;
                    };
                    if node.params.contains_key(k) {
                        diags.push(err(format!("parameter `{k}` given twice")).about(name));
                        ok = false;
                        continue;
                    }
                    match parse_value(dim, v) {
                        Ok(pv) => {
                            node.params.insert(k.to_string(), pv);
                        }
                        Err(m) => {
                            diags.push(err(m).about(name));
                            ok = false;
                        }
                    }
                }
                if ok {
                    if let Err(e) = node.check_params() {
                        diags.push(err(e.to_string()).about(name));
                    }
                }
                names.insert(name.to_string(), line);
                spec.nodes.push(node);
            }
            "edge" => {
                if rest.len() != 2 {
                    diags.push(err("expected `edge <from[.port]> <to[.port]>`".into()));
                    continue;
                }
                let (from, from_port) = split_port(rest[0]);
                let (to, to_port) = split_port(rest[1]);
                if !is_ident(from) || !is_ident(to) {
                    diags.push(err(format!("malformed edge `{} {}`", rest[0], rest[1])));
                    continue;
                }
                raw_edges.push(RawEdge {
                    from: from.into(),
                    from_port: from_port.map(str::to_string),
                    to: to.into(),
                    to_port: to_port.map(str::to_string),
                    line,
                });
            }
            other => diags.push(err(format!("unknown directive `{other}`"))),
        }
    }

    for raw in raw_edges {
        let line = Some(raw.line);
        let label = format!("{} -> {}", raw.from, raw.to);
        let mut ok = true;
        for end in [&raw.from, &raw.to] {
            if !names.contains_key(end.as_str()) {
                diags.push(
                    Diagnostic::error(format!("edge refers to undeclared node `{end}`"))
                        .about(label.clone())
                        .at(line),
                );
                ok = false;
            }
        }
        let branch = match raw.from_port.as_deref() {
            None => None,
            Some(p) => match p.parse::<usize>() {
                Ok(k) => Some(k),
                Err(_) => {
                    diags.push(
                        Diagnostic::error(format!("output port `.{p}` must be a branch index"))
                            .about(label.clone())
                            .at(line),
                    );
                    ok = false;
                    None
                }
            },
        };
        let port = match raw.to_port.as_deref() {
            Some("exc") => InPort::Exc,
            Some("inh") => InPort::Inh,
            None => {
                let is_neuron = spec
                    .node(&raw.to)
                    .is_some_and(|n| n.kind == NodeKind::Neuron);
                if is_neuron {
                    InPort::Exc
                } else {
                    InPort::Main
                }
            }
            Some(p) => {
                diags.push(
                    Diagnostic::error(format!("unknown input port `.{p}`"))
                        .about(label.clone())
                        .at(line),
                );
                ok = false;
                InPort::Main
            }
        };
        if ok {
            spec.edges.push(Edge {
                from: raw.from,
                branch,
                to: raw.to,
                port,
                line,
            });
        }
    }

    if diags.iter().any(Diagnostic::is_error) {
        Err(diags)
    } else {
        Ok(spec)
    }
}
