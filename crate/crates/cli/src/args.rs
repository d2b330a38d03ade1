// SPDX-License-Identifier: Apache-2.0

//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluxnet_core::devices::{NeuronParams, SynapseParams};
use fluxnet_core::netgraph::SourceProcess;
use fluxnet_core::pulse::RATE_NORM_GHZ;
use fluxnet_core::trainer::{LOGIC_HIGH, LOGIC_LOW, ON_TARGET};
use serde::Serialize;

#[derive(Debug, Clone, Parser)]
#[command(name = "fluxnet", version, about = "Simulate, characterise and train SFQ spiking networks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags every subcommand accepts.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Random seed; each subcommand documents its default.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Simulated time per engine run, ps.
    #[arg(long = "duration-ps", global = true)]
    pub duration_ps: Option<f64>,
    /// Directory that receives every output file and its manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Rate that normalized axes divide by, GHz.
    #[arg(long = "rate-norm-ghz", global = true, default_value_t = RATE_NORM_GHZ)]
    pub rate_norm_ghz: f64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Empirical pass probability of one synapse over a bias sweep.
    CharacterizeSynapse(SynapseOpts),
    /// Output rate of one neuron against its excitatory input rate.
    CharacterizeNeuron(NeuronOpts),
    /// Fit an activation model to a characterisation CSV.
    FitActivation(FitOpts),
    /// Train the XOR network and write the model and its lowered netlist.
    TrainXor(TrainXorOpts),
    /// Compile a trained model file into a netlist.
    Lower(LowerOpts),
    /// Run a netlist through the event engine.
    Simulate(SimulateOpts),
    /// Sweep both inputs of a two-input netlist over a grid.
    PhaseDiagram(PhaseOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CharacterizeSynapse(_) => "characterize-synapse",
            Command::CharacterizeNeuron(_) => "characterize-neuron",
            Command::FitActivation(_) => "fit-activation",
            Command::TrainXor(_) => "train-xor",
            Command::Lower(_) => "lower",
            Command::Simulate(_) => "simulate",
            Command::PhaseDiagram(_) => "phase-diagram",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynapseOpts {
    /// Input pulses per bias point.
    #[arg(long, default_value_t = 10_000)]
    pub pulses: usize,
    /// Number of bias points.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// First bias of the sweep, µA.
    #[arg(long = "i-min-ua", default_value_t = 40.0)]
    pub i_min: f64,
    /// Last bias of the sweep, µA.
    #[arg(long = "i-max-ua", default_value_t = 160.0)]
    pub i_max: f64,
    /// Input pulse rate, GHz.
    #[arg(long = "rate-ghz", default_value_t = 50.0)]
    pub rate_ghz: f64,
    #[arg(long = "i-c-ua", default_value_t = SynapseParams::default().i_c)]
    pub i_c: f64,
    #[arg(long = "i-center-ua", default_value_t = SynapseParams::default().i_center)]
    pub i_center: f64,
    #[arg(long = "sigma-ua", default_value_t = SynapseParams::default().sigma_gz)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Regular,
    Poisson,
}

impl From<Process> for SourceProcess {
    fn from(p: Process) -> Self {
        match p {
            Process::Regular => SourceProcess::Regular,
            Process::Poisson => SourceProcess::Poisson,
        }
    }
}

/// Neuron device parameters.
#[derive(Debug, Clone, Args, Serialize)]
pub struct NeuronFlags {
    #[arg(long, default_value_t = NeuronParams::default().theta)]
    pub theta: f64,
    /// Leak time constant, ps (`inf` disables the leak).
    #[arg(long = "tau-leak-ps", default_value_t = NeuronParams::default().tau_leak)]
    pub tau_leak: f64,
    #[arg(long = "t-ref-ps", default_value_t = NeuronParams::default().t_ref)]
    pub t_ref: f64,
    #[arg(long = "clamp-floor", default_value_t = NeuronParams::default().clamp_floor, allow_hyphen_values = true)]
    pub clamp_floor: f64,
}

impl NeuronFlags {
    pub fn params(&self) -> NeuronParams {
        NeuronParams {
            theta: self.theta,
            tau_leak: self.tau_leak,
            t_ref: self.t_ref,
            clamp_floor: self.clamp_floor,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NeuronOpts {
    #[command(flatten)]
    pub neuron: NeuronFlags,
    /// Number of input rates.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Largest normalized input rate.
    #[arg(long = "max-norm", default_value_t = 2.0)]
    pub max_norm: f64,
    /// Input pulse process.
    #[arg(long, value_enum, default_value_t = Process::Regular)]
    pub process: Process,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitOpts {
    /// `r_in_norm,r_out_norm` CSV; characterised afresh when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub characterize: NeuronOpts,
    /// Lower bound on the fitted knee width, GHz.
    #[arg(long = "min-beta-ghz", default_value_t = 0.0)]
    pub min_beta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainXorOpts {
    /// Normalized input rate encoding logic 0.
    #[arg(long, default_value_t = LOGIC_LOW)]
    pub low: f64,
    /// Normalized input rate encoding logic 1.
    #[arg(long, default_value_t = LOGIC_HIGH)]
    pub high: f64,
    /// Normalized output target for the true corners.
    #[arg(long = "on-target", default_value_t = ON_TARGET)]
    pub on_target: f64,
    #[arg(long = "learning-rate", default_value_t = 0.5)]
    pub learning_rate: f64,
    #[arg(long = "max-epochs", default_value_t = 5000)]
    pub max_epochs: usize,
    #[arg(long = "target-loss", default_value_t = 1e-3)]
    pub target_loss: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LowerOpts {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateOpts {
    /// Netlist to run.
    #[arg(long)]
    pub netlist: PathBuf,
    /// Normalized rates for sources `in0`, `in1`, ... (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<f64>,
    /// Override a source rate: `NAME=GHZ`; repeatable.
    #[arg(long = "rate", value_parser = parse_override)]
    pub rates: Vec<(String, f64)>,
    /// Also write per-probe pulse lists and per-neuron state traces.
    #[arg(long)]
    pub traces: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseOpts {
    /// Two-input netlist, as written by `train-xor` or `lower`.
    #[arg(long)]
    pub netlist: PathBuf,
    /// Points per axis.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// Largest normalized input rate on both axes.
    #[arg(long = "max-norm", default_value_t = 2.0)]
    pub max_norm: f64,
    /// Probe whose rate is recorded.
    #[arg(long, default_value = "out0")]
    pub probe: String,
    /// Normalized output above which a grid point counts as high.
    #[arg(long, default_value_t = 0.75)]
    pub threshold: f64,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=GHZ, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad rate in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_flags_follow_the_subcommand() {
        let c = Cli::try_parse_from(["fluxnet", "characterize-neuron", "--seed", "4", "--out", "x"]).unwrap();
        assert_eq!(c.common.seed, Some(4));
        assert_eq!(c.common.out, PathBuf::from("x"));
        assert_eq!(c.command.name(), "characterize-neuron");
    }

    #[test]
    fn overrides_and_lists_parse() {
        let c = Cli::try_parse_from([
            "fluxnet", "simulate", "--netlist", "a.net", "--inputs", "0.2,1.8", "--rate", "b1_0=3.5",
        ])
        .unwrap();
        let Command::Simulate(o) = c.command else { panic!() };
        assert_eq!(o.inputs, vec![0.2, 1.8]);
        assert_eq!(o.rates, vec![("b1_0".to_string(), 3.5)]);
        assert!(parse_override("nope").is_err());
    }

    #[test]
    fn infinite_leak_and_negative_floor_accepted() {
        let c = Cli::try_parse_from([
            "fluxnet", "characterize-neuron", "--tau-leak-ps", "inf", "--clamp-floor", "-4",
        ])
        .unwrap();
        let Command::CharacterizeNeuron(o) = c.command else { panic!() };
        assert!(o.neuron.tau_leak.is_infinite());
        assert_eq!(o.neuron.clamp_floor, -4.0);
    }
}
