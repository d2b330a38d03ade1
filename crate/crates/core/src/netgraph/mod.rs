// SPDX-License-Identifier: Apache-2.0

//! Network description: node and edge declarations, the netlist text
//! format, validation and splitter-tree fan-out expansion.

mod expand;
mod parse;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

pub use expand::expand_fanout;
pub use parse::parse_netlist;
pub use validate::{topo_order, validate};

use crate::devices::{
    bias_for_weight, MergerParams, NeuronParams, SplitterParams, SynapseParams,
};
use crate::error::{invalid, Result};

/// Default run length when a netlist has no `set duration`.
pub const DEFAULT_DURATION_PS: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Source,
    Synapse,
    Merger,
    Splitter,
    Neuron,
    Probe,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Source => "source",
            NodeKind::Synapse => "synapse",
            NodeKind::Merger => "merger",
            NodeKind::Splitter => "splitter",
            NodeKind::Neuron => "neuron",
            NodeKind::Probe => "probe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "source" => NodeKind::Source,
            "synapse" => NodeKind::Synapse,
            "merger" => NodeKind::Merger,
            "splitter" => NodeKind::Splitter,
            "neuron" => NodeKind::Neuron,
            "probe" => NodeKind::Probe,
            _ => return None,
        })
    }

    pub fn has_output(self) -> bool {
        self != NodeKind::Probe
    }

    pub fn has_input(self) -> bool {
        self != NodeKind::Source
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Physical dimension of a parameter, which fixes its accepted unit suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Time,
    Rate,
    Current,
    /// Plain real number, no unit.
    Scalar,
    /// Non-negative integer, no unit.
    Count,
    Word,
}

impl Dim {
    fn canonical_unit(self) -> &'static str {
        match self {
            Dim::Time => "ps",
            Dim::Rate => "GHz",
            Dim::Current => "uA",
            _ => "",
        }
    }
}

/// Which parameters a node kind accepts and whether each is required.
pub fn param_schema(kind: NodeKind) -> &'static [(&'static str, Dim, bool)] {
    match kind {
        NodeKind::Source => &[
            ("rate", Dim::Rate, true),
            ("phase", Dim::Time, false),
            ("process", Dim::Word, false),
        ],
        // weight and i_b are mutually exclusive; checked separately
        NodeKind::Synapse => &[
            ("weight", Dim::Scalar, false),
            ("i_b", Dim::Current, false),
            ("i_c", Dim::Current, false),
            ("i_center", Dim::Current, false),
            ("sigma_gz", Dim::Current, false),
        ],
        NodeKind::Merger => &[("t_dead", Dim::Time, false)],
        NodeKind::Splitter => &[("delay", Dim::Time, false), ("fanout", Dim::Count, false)],
        NodeKind::Neuron => &[
            ("theta", Dim::Scalar, true),
            ("tau_leak", Dim::Time, true),
            ("t_ref", Dim::Time, true),
            ("clamp_floor", Dim::Scalar, false),
        ],
        NodeKind::Probe => &[],
    }
}

pub(crate) fn param_dim(kind: NodeKind, key: &str) -> Option<Dim> {
    param_schema(kind)
        .iter()
        .find(|(k, _, _)| *k == key)
        .map(|(_, d, _)| *d)
}

/// A parameter value, with quantities already converted to ps, GHz or µA.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Word(String),
}

impl ParamValue {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            ParamValue::Num(v) => Some(*v),
            ParamValue::Word(_) => None,
        }
    }
}

/// Stochastic process a source emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceProcess {
    #[default]
    Regular,
    Poisson,
}

impl SourceProcess {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceProcess::Regular => "regular",
            SourceProcess::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecl {
    pub name: String,
    pub kind: NodeKind,
    pub params: BTreeMap<String, ParamValue>,
    /// Source line, when parsed from text.
    pub line: Option<usize>,
}

impl NodeDecl {
    pub fn new(kind: NodeKind, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind,
            params: BTreeMap::new(),
            line: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), ParamValue::Num(value));
        self
    }

    pub fn with_word(mut self, key: &str, value: &str) -> Self {
        self.params
            .insert(key.to_string(), ParamValue::Word(value.to_string()));
        self
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(ParamValue::as_num)
    }

    fn num_or(&self, key: &str, default: f64) -> f64 {
        self.num(key).unwrap_or(default)
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.num(key).ok_or_else(|| {
            invalid(format!("{} `{}` is missing `{key}`", self.kind, self.name))
        })
    }

    pub fn source_rate(&self) -> Result<f64> {
        self.require("rate")
    }

    pub fn source_phase(&self) -> f64 {
        self.num_or("phase", 0.0)
    }

    pub fn source_process(&self) -> Result<SourceProcess> {
        match self.params.get("process") {
            None => Ok(SourceProcess::Regular),
            Some(ParamValue::Word(w)) if w == "regular" => Ok(SourceProcess::Regular),
            Some(ParamValue::Word(w)) if w == "poisson" => Ok(SourceProcess::Poisson),
            Some(other) => Err(invalid(format!(
                "source `{}`: unknown process {other:?}",
                self.name
            ))),
        }
    }

    /// Device parameters with the bias resolved from `weight` when given.
    pub fn synapse_params(&self) -> Result<SynapseParams> {
        let d = SynapseParams::default();
        let base = SynapseParams {
            i_c: self.num_or("i_c", d.i_c),
            i_center: self.num_or("i_center", d.i_center),
            sigma_gz: self.num_or("sigma_gz", d.sigma_gz),
            i_b: d.i_b,
        };
        base.validate()?;
        let i_b = match (self.num("weight"), self.num("i_b")) {
            (Some(_), Some(_)) => {
                return Err(invalid(format!(
                    "synapse `{}` sets both weight and i_b",
                    self.name
                )))
            }
            (Some(w), None) => bias_for_weight(&base, w)?,
            (None, Some(i_b)) => i_b,
            (None, None) => {
                return Err(invalid(format!(
                    "synapse `{}` needs weight or i_b",
                    self.name
                )))
            }
        };
        let p = base.with_bias(i_b);
        p.validate()?;
        Ok(p)
    }

    pub fn neuron_params(&self) -> Result<NeuronParams> {
        let p = NeuronParams {
            theta: self.require("theta")?,
            tau_leak: self.require("tau_leak")?,
            t_ref: self.require("t_ref")?,
            clamp_floor: self.num_or("clamp_floor", 0.0),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn merger_params(&self) -> Result<MergerParams> {
        let p = MergerParams {
            t_dead: self.num_or("t_dead", MergerParams::default().t_dead),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn splitter_params(&self) -> Result<SplitterParams> {
        let d = SplitterParams::default();
        let fanout = self.num_or("fanout", d.fanout as f64);
        if fanout.fract() != 0.0 || fanout < 0.0 {
            return Err(invalid(format!("splitter `{}`: fanout must be an integer", self.name)));
        }
        let p = SplitterParams {
            delay: self.num_or("delay", d.delay),
            fanout: fanout as usize,
        };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn fanout(&self) -> usize {
        self.splitter_params().map(|p| p.fanout).unwrap_or(0)
    }

    /// Checks parameters against the schema and device constraints.
    pub fn check_params(&self) -> Result<()> {
        for key in self.params.keys() {
            if param_dim(self.kind, key).is_none() {
                return Err(invalid(format!("{} has no parameter `{key}`", self.kind)));
            }
        }
        for (key, _, required) in param_schema(self.kind) {
            if *required && !self.params.contains_key(*key) {
                return Err(invalid(format!("{} `{}` is missing `{key}`", self.kind, self.name)));
            }
        }
        match self.kind {
            NodeKind::Source => {
                let r = self.source_rate()?;
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(invalid(format!("source `{}`: rate must be >= 0", self.name)));
                }
                if self.source_phase() < 0.0 {
                    return Err(invalid(format!("source `{}`: phase must be >= 0", self.name)));
                }
                self.source_process().map(|_| ())
            }
            NodeKind::Synapse => self.synapse_params().map(|_| ()),
            NodeKind::Merger => self.merger_params().map(|_| ()),
            NodeKind::Splitter => self.splitter_params().map(|_| ()),
            NodeKind::Neuron => self.neuron_params().map(|_| ()),
            NodeKind::Probe => Ok(()),
        }
    }
}

/// Input port selector on the receiving end of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InPort {
    /// The single input of a non-neuron node.
    Main,
    Exc,
    Inh,
}

impl InPort {
    fn suffix(self) -> &'static str {
        match self {
            InPort::Main => "",
            InPort::Exc => ".exc",
            InPort::Inh => ".inh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    /// Splitter branch index; `None` for every other kind.
    pub branch: Option<usize>,
    pub to: String,
    pub port: InPort,
    pub line: Option<usize>,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            branch: None,
            to: to.into(),
            port: InPort::Main,
            line: None,
        }
    }

    pub fn branch(mut self, k: usize) -> Self {
        self.branch = Some(k);
        self
    }

    pub fn port(mut self, port: InPort) -> Self {
        self.port = port;
        self
    }

    pub(crate) fn from_label(&self) -> String {
        match self.branch {
            Some(k) => format!("{}.{k}", self.from),
            None => self.from.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeDecl>,
    pub edges: Vec<Edge>,
    pub seed: u64,
    pub duration: f64,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            nodes: Vec::new(),
            edges: Vec::new(),
            seed: 0,
            duration: DEFAULT_DURATION_PS,
        }
    }
}

impl NetworkSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, node: NodeDecl) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn connect(&mut self, edge: Edge) -> &mut Self {
        self.edges.push(edge);
        self
    }

    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_mut(&mut self, name: &str) -> Option<&mut NodeDecl> {
        self.nodes.iter_mut().find(|n| n.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &NodeDecl> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    /// Same spec with all source-line annotations dropped.
    pub fn without_lines(&self) -> Self {
        let mut s = self.clone();
        s.nodes.iter_mut().for_each(|n| n.line = None);
        s.edges.iter_mut().for_each(|e| e.line = None);
        s
    }

    /// Serialises to the netlist text format.
    pub fn to_netlist(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn format_value(kind: NodeKind, key: &str, v: &ParamValue) -> String {
    match v {
        ParamValue::Word(w) => w.clone(),
        ParamValue::Num(x) => {
            let unit = param_dim(kind, key).map(Dim::canonical_unit).unwrap_or("");
            if x.is_infinite() {
                "inf".to_string()
            } else {
                format!("{x}{unit}")
            }
        }
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "set seed={}", self.seed)?;
        writeln!(f, "set duration={}ps", self.duration)?;
        for n in &self.nodes {
            write!(f, "node {} {}", n.kind, n.name)?;
            for (k, v) in &n.params {
                write!(f, " {k}={}", format_value(n.kind, k, v))?;
            }
            writeln!(f)?;
        }
        for e in &self.edges {
            writeln!(f, "edge {} {}{}", e.from_label(), e.to, e.port.suffix())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Node name or edge label the message is about.
    pub subject: Option<String>,
    pub message: String,
    pub line: Option<usize>,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            subject: None,
            message: message.into(),
            line: None,
        }
    }

    pub fn warning(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(message)
        }
    }

    pub fn at(mut self, line: Option<usize>) -> Self {
        self.line = line;
        self
    }

    pub fn about(mut self, subject: impl Into<String>) -> Self {
        self.subject = Some(subject.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: ")?;
        if let Some(s) = &self.subject {
            write!(f, "`{s}`: ")?;
        }
        f.write_str(&self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
