// SPDX-License-Identifier: Apache-2.0

use fluxnet_core::devices::MergerParams;
use fluxnet_core::trainer::{build_xor, lower_to_network, train, xor_dataset, MlpSpec, TrainConfig, TrainReport, XorDevices};
use fluxnet_core::NetworkSpec;

use crate::args::{LowerOpts, TrainXorOpts};
use crate::error::CliResult;
use crate::manifest::Run;
use crate::table::to_csv;

pub const DEFAULT_SEED: u64 = 1;
/// Duration written into generated netlists, ps.
pub const NETLIST_DURATION_PS: f64 = 20_000.0;

/// Lowers with the XOR device set, keeping the model's merger dead time.
pub fn lower(mlp: &MlpSpec, seed: u64, duration: f64) -> CliResult<NetworkSpec> {
    let d = XorDevices::default();
    let mp = MergerParams { t_dead: mlp.t_dead };
    let mut spec = lower_to_network(mlp, &d.synapse, &d.neuron, &mp, &d.splitter)?;
    spec.seed = seed;
    spec.duration = duration;
    Ok(spec)
}

pub fn train_xor(o: &TrainXorOpts, seed: u64, rate_norm: f64) -> CliResult<TrainReport> {
    let (mut mlp, _) = build_xor();
    mlp.rate_norm = rate_norm;
    let data = xor_dataset(o.low, o.high, o.on_target)?;
    let cfg = TrainConfig {
        learning_rate: o.learning_rate,
        max_epochs: o.max_epochs,
        target_loss: o.target_loss,
        seed: Some(seed),
        ..TrainConfig::default()
    };
    Ok(train(&mlp, &data, &cfg)?)
}

pub fn run_train(run: &mut Run, o: &TrainXorOpts) -> CliResult<()> {
    let seed = run.seed_or(DEFAULT_SEED);
    let rep = train_xor(o, seed, run.common.rate_norm_ghz)?;
    let spec = lower(&rep.mlp, seed, run.common.duration_ps.unwrap_or(NETLIST_DURATION_PS))?;
    run.write("xor_model.txt", &rep.mlp.to_text())?;
    run.write("xor_loss.csv", &to_csv(&["epoch", "loss"], rep.losses.iter().enumerate()))?;
    let net = run.write("xor.net", &spec.to_netlist())?;
    run.result("final_loss", rep.final_loss());
    run.result("epochs", rep.epochs);
    run.say(format!("final loss {:.6} after {} epochs", rep.final_loss(), rep.epochs));
    run.say(format!("wrote {}", net.display()));
    Ok(())
}

pub fn run_lower(run: &mut Run, o: &LowerOpts) -> CliResult<()> {
    let seed = run.seed_or(DEFAULT_SEED);
    let text = run.read(&o.model)?;
    let mlp = MlpSpec::from_text(&text)?;
    let spec = lower(&mlp, seed, run.common.duration_ps.unwrap_or(NETLIST_DURATION_PS))?;
    let stem = o.model.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let path = run.write(&format!("{stem}.net"), &spec.to_netlist())?;
    run.result("nodes", spec.nodes.len());
    run.say(format!("wrote {} ({} nodes)", path.display(), spec.nodes.len()));
    Ok(())
}
