// SPDX-License-Identifier: Apache-2.0

//! Library behind the `fluxnet` binary. Every subcommand writes its outputs
//! plus a `<subcommand>.manifest.json` into the `--out` directory.

pub mod args;
pub mod cmd;
pub mod error;
pub mod manifest;
pub mod table;

use clap::Parser;

pub use args::{Cli, Command, Common};
pub use error::{CliError, CliResult};
pub use manifest::{Outcome, Run, RunManifest};

/// Parses `argv` (program name first) and runs the chosen subcommand.
pub fn run_from<I, T>(argv: I) -> CliResult<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, argv.get(1..).unwrap_or_default())
}

/// Runs an already parsed command line. `argv` is recorded in the manifest.
pub fn run(cli: &Cli, argv: &[String]) -> CliResult<Outcome> {
    if !(cli.common.rate_norm_ghz > 0.0) || !cli.common.rate_norm_ghz.is_finite() {
        return Err(CliError::Usage("--rate-norm-ghz must be positive".into()));
    }
    if let Some(d) = cli.common.duration_ps {
        if !(d > 0.0) || !d.is_finite() {
            return Err(CliError::Usage("--duration-ps must be positive".into()));
        }
    }
    let mut r = Run::new(&cli.common);
    let params = match &cli.command {
        Command::CharacterizeSynapse(o) => {
            cmd::synapse::run(&mut r, o)?;
            serde_json::to_value(o)
        }
        Command::CharacterizeNeuron(o) => {
            cmd::neuron::run_characterize(&mut r, o)?;
            serde_json::to_value(o)
        }
        Command::FitActivation(o) => {
            cmd::neuron::run_fit(&mut r, o)?;
            serde_json::to_value(o)
        }
        Command::TrainXor(o) => {
            cmd::xor::run_train(&mut r, o)?;
            serde_json::to_value(o)
        }
        Command::Lower(o) => {
            cmd::xor::run_lower(&mut r, o)?;
            serde_json::to_value(o)
        }
        Command::Simulate(o) => {
            cmd::simulate::run(&mut r, o)?;
            serde_json::to_value(o)
        }
        Command::PhaseDiagram(o) => {
            cmd::phase::run(&mut r, o)?;
            serde_json::to_value(o)
        }
    }
    .expect("options serialise");
    r.finish(cli.command.name(), argv, params)
}
