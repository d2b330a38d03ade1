// SPDX-License-Identifier: Apache-2.0

use fluxnet_core::netgraph::DEFAULT_DURATION_PS;
use fluxnet_core::ratemodel::{characterize_neuron_with, fit_activation, FitReport};
use fluxnet_core::EngineConfig;

use crate::args::{FitOpts, NeuronOpts};
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::table::{read_pairs, to_csv};

pub const DEFAULT_SEED: u64 = 1;
const COLUMNS: [&str; 2] = ["r_in_norm", "r_out_norm"];

/// `(r_in, r_out)` pairs, both normalized.
pub fn characterize(o: &NeuronOpts, duration: f64, seed: u64, rate_norm: f64) -> CliResult<Vec<(f64, f64)>> {
    if o.points < 2 || !(o.max_norm > 0.0) {
        return Err(CliError::Usage("need at least 2 points and a positive --max-norm".into()));
    }
    let grid: Vec<f64> = (0..o.points)
        .map(|i| i as f64 / (o.points - 1) as f64 * o.max_norm * rate_norm)
        .collect();
    let cfg = EngineConfig { duration, seed, ..EngineConfig::default() };
    let pts = characterize_neuron_with(&o.neuron.params(), &grid, &cfg, o.process.into())?;
    Ok(pts.into_iter().map(|(a, b)| (a / rate_norm, b / rate_norm)).collect())
}

pub fn run_characterize(run: &mut Run, o: &NeuronOpts) -> CliResult<()> {
    let seed = run.seed_or(DEFAULT_SEED);
    let duration = run.common.duration_ps.unwrap_or(DEFAULT_DURATION_PS);
    let pts = characterize(o, duration, seed, run.common.rate_norm_ghz)?;
    let path = run.write("neuron.csv", &to_csv(&COLUMNS, &pts))?;
    let top = pts.last().map(|p| p.1).unwrap_or(0.0);
    run.result("r_out_norm_at_max", top);
    run.say(format!("wrote {} ({} points, output {top:.3} at the top input)", path.display(), pts.len()));
    Ok(())
}

pub fn fit(run: &mut Run, o: &FitOpts) -> CliResult<FitReport> {
    let rn = run.common.rate_norm_ghz;
    let pts = match &o.input {
        Some(p) => {
            let text = run.read(p)?;
            read_pairs(&text, COLUMNS)?
        }
        None => {
            let seed = run.seed_or(DEFAULT_SEED);
            let duration = run.common.duration_ps.unwrap_or(DEFAULT_DURATION_PS);
            characterize(&o.characterize, duration, seed, rn)?
        }
    };
    let ghz: Vec<(f64, f64)> = pts.iter().map(|(a, b)| (a * rn, b * rn)).collect();
    let mut rep = fit_activation(&ghz)?;
    rep.model.beta = rep.model.beta.max(o.min_beta);
    Ok(rep)
}

pub fn run_fit(run: &mut Run, o: &FitOpts) -> CliResult<()> {
    let rep = fit(run, o)?;
    let path = run.write("activation.txt", &rep.model.to_text())?;
    run.result("rms_ghz", rep.rms);
    run.result("iterations", rep.iterations);
    run.say(format!("fitted {} (rms {:.3} GHz)", rep.model, rep.rms));
    run.say(format!("wrote {}", path.display()));
    Ok(())
}
