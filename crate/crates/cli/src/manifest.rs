// SPDX-License-Identifier: Apache-2.0

//! Output directory handling and the run manifest written beside every output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::args::Common;
use crate::error::{CliError, CliResult};

/// Everything needed to reproduce a run. Contains no timestamps or host
/// details, so identical invocations yield identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Command line as given, minus the program name.
    pub argv: Vec<String>,
    /// Seed actually used, after defaults.
    pub seed: Option<u64>,
    pub common: Common,
    pub params: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub results: BTreeMap<String, Value>,
}

/// Context for one subcommand: collects files, inputs and summary values.
pub struct Run {
    pub common: Common,
    out: PathBuf,
    inputs: Vec<String>,
    outputs: Vec<String>,
    results: BTreeMap<String, Value>,
    lines: Vec<String>,
    seed: Option<u64>,
}

/// What a finished subcommand reports back to the caller.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub results: BTreeMap<String, Value>,
}

impl Run {
    pub fn new(common: &Common) -> Self {
        Self {
            common: common.clone(),
            out: common.out.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            results: BTreeMap::new(),
            lines: Vec::new(),
            seed: None,
        }
    }

    /// Resolves the seed against a subcommand default and records it.
    pub fn seed_or(&mut self, default: u64) -> u64 {
        let s = self.common.seed.unwrap_or(default);
        self.seed = Some(s);
        s
    }

    pub fn note_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(path.display().to_string());
        Ok(text)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.results.insert(key.to_string(), v);
    }

    pub fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    /// Writes `<subcommand>.manifest.json` and closes the run.
    pub fn finish(mut self, subcommand: &str, argv: &[String], params: Value) -> CliResult<Outcome> {
        let manifest = RunManifest {
            tool: "fluxnet".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            argv: argv.to_vec(),
            seed: self.seed,
            common: self.common.clone(),
            params,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            results: self.results.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
        let path = self.write(&format!("{subcommand}.manifest.json"), &text)?;
        self.outputs.pop();
        Ok(Outcome {
            lines: self.lines,
            outputs: self.outputs.iter().map(PathBuf::from).collect(),
            manifest: path,
            results: self.results,
        })
    }
}
