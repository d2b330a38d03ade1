// SPDX-License-Identifier: Apache-2.0

use fluxnet_core::devices::{pass_probability, synapse_gate, SynapseParams};
use fluxnet_core::stream::node_seed;
use fluxnet_core::PulseTrain;
use rayon::prelude::*;

use crate::args::SynapseOpts;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::table::to_csv;

pub const DEFAULT_SEED: u64 = 1;

/// One bias point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynapsePoint {
    pub i_b: f64,
    pub p_emp: f64,
    pub p_model: f64,
}

impl SynapsePoint {
    /// `|p_emp - p_model|` in units of the binomial standard error.
    pub fn deviation_sigmas(&self, pulses: usize) -> f64 {
        let se = (self.p_model * (1.0 - self.p_model) / pulses as f64).sqrt();
        let d = (self.p_emp - self.p_model).abs();
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn sweep(o: &SynapseOpts, seed: u64) -> CliResult<Vec<SynapsePoint>> {
    if o.points < 2 || o.pulses == 0 {
        return Err(CliError::Usage("need at least 2 points and 1 pulse".into()));
    }
    if !(o.i_max > o.i_min) || !(o.rate_ghz > 0.0) {
        return Err(CliError::Usage("need i_max > i_min and a positive rate".into()));
    }
    let base = SynapseParams { i_c: o.i_c, i_center: o.i_center, sigma_gz: o.sigma, i_b: o.i_center };
    base.validate()?;
    let period = 1000.0 / o.rate_ghz;
    let input = PulseTrain::from_times((0..o.pulses).map(|k| k as f64 * period).collect())?;
    Ok((0..o.points)
        .into_par_iter()
        .map(|k| {
            let i_b = o.i_min + (o.i_max - o.i_min) * k as f64 / (o.points - 1) as f64;
            let p = base.with_bias(i_b);
            let out = synapse_gate(&p, &input, node_seed(seed, &format!("sweep{k}")));
            SynapsePoint { i_b, p_emp: out.len() as f64 / o.pulses as f64, p_model: pass_probability(&p) }
        })
        .collect())
}

pub fn run(run: &mut Run, o: &SynapseOpts) -> CliResult<()> {
    let seed = run.seed_or(DEFAULT_SEED);
    let pts = sweep(o, seed)?;
    let csv = to_csv(&["i_b_ua", "p_emp", "p_model"], pts.iter().map(|p| (p.i_b, p.p_emp, p.p_model)));
    let path = run.write("synapse.csv", &csv)?;
    let worst = pts.iter().map(|p| p.deviation_sigmas(o.pulses)).fold(0.0, f64::max);
    run.result("max_deviation_sigmas", worst);
    run.say(format!("wrote {} ({} points, worst deviation {worst:.2} sigma)", path.display(), pts.len()));
    Ok(())
}
