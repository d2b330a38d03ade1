// SPDX-License-Identifier: Apache-2.0

use fluxnet_core::netgraph::{NodeKind, ParamValue};
use fluxnet_core::trainer::apply_inputs;
use fluxnet_core::{parse_netlist, simulate, EngineConfig, Error, NetworkSpec, SimResult};

use crate::args::SimulateOpts;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub fn load(run: &mut Run, path: &std::path::Path) -> CliResult<NetworkSpec> {
    let text = run.read(path)?;
    parse_netlist(&text).map_err(|d| CliError::Domain(Error::Netlist(d)))
}

/// Sets a source's rate, keeping its phase at the same fraction of a period.
pub fn set_source_rate(spec: &mut NetworkSpec, name: &str, rate_ghz: f64) -> CliResult<()> {
    let node = spec
        .node_mut(name)
        .filter(|n| n.kind == NodeKind::Source)
        .ok_or_else(|| CliError::Usage(format!("`{name}` is not a source in this netlist")))?;
    let old = node.source_rate()?;
    let phase = node.source_phase();
    node.params.insert("rate".into(), ParamValue::Num(rate_ghz));
    if old > 0.0 && rate_ghz > 0.0 {
        node.params.insert("phase".into(), ParamValue::Num(phase * old / rate_ghz));
    } else {
        node.params.remove("phase");
    }
    Ok(())
}

/// Applies overrides and runs; `None` keeps the netlist's own seed and duration.
pub fn run_spec(
    mut spec: NetworkSpec,
    o: &SimulateOpts,
    seed: Option<u64>,
    duration: Option<f64>,
    rate_norm: f64,
) -> CliResult<SimResult> {
    if !o.inputs.is_empty() {
        apply_inputs(&mut spec, &o.inputs, rate_norm)?;
    }
    for (name, r) in &o.rates {
        set_source_rate(&mut spec, name, *r)?;
    }
    let mut cfg = EngineConfig::for_spec(&spec);
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.duration = duration.unwrap_or(cfg.duration);
    cfg.trace_states = o.traces;
    Ok(simulate(&spec, &cfg)?)
}

pub fn run(run: &mut Run, o: &SimulateOpts) -> CliResult<()> {
    let spec = load(run, &o.netlist)?;
    let seed = run.common.seed.unwrap_or(spec.seed);
    run.note_seed(seed);
    let rn = run.common.rate_norm_ghz;
    let res = run_spec(spec, o, Some(seed), run.common.duration_ps, rn)?;
    let path = run.write("rates.csv", &res.rates_csv())?;
    if o.traces {
        for (probe, train) in &res.probe_trains {
            run.write(&format!("pulses_{probe}.csv"), &train.to_csv())?;
        }
        for (neuron, trace) in res.traces.iter().flatten() {
            run.write(&format!("trace_{neuron}.csv"), &trace.to_csv())?;
        }
    }
    for (probe, r) in &res.probe_rates {
        run.say(format!("{probe}: {r:.3} GHz ({:.3} normalized)", r / rn));
    }
    run.say(format!("energy {:e} J over {} switches", res.energy_j, res.switch_count));
    run.result("probe_rates_ghz", &res.probe_rates);
    run.result("switch_count", res.switch_count);
    run.result("energy_j", res.energy_j);
    run.say(format!("wrote {}", path.display()));
    Ok(())
}
