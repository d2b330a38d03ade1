// SPDX-License-Identifier: Apache-2.0

use fluxnet_core::netgraph::DEFAULT_DURATION_PS;
use fluxnet_core::trainer::apply_inputs;
use fluxnet_core::{simulate, EngineConfig, NetworkSpec};
use rayon::prelude::*;

use crate::args::PhaseOpts;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::table::to_csv;

/// Normalized output on an `n x n` grid, row-major in the first input.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub n: usize,
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhaseGrid {
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.n).flat_map(move |a| (0..self.n).map(move |b| (self.axis[a], self.axis[b], self.at(a, b))))
    }

    /// Connected regions at or above `threshold`, 4-neighbour connectivity.
    /// Each region is listed as its grid cells.
    pub fn lobes(&self, threshold: f64) -> Vec<Vec<(usize, usize)>> {
        let n = self.n;
        let mut seen = vec![false; n * n];
        let mut out = Vec::new();
        for start in 0..n * n {
            if seen[start] || self.values[start] < threshold {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut cells = Vec::new();
            while let Some(c) = stack.pop() {
                let (a, b) = (c / n, c % n);
                cells.push((a, b));
                let mut nb = Vec::with_capacity(4);
                if a > 0 {
                    nb.push(c - n);
                }
                if a + 1 < n {
                    nb.push(c + n);
                }
                if b > 0 {
                    nb.push(c - 1);
                }
                if b + 1 < n {
                    nb.push(c + 1);
                }
                for q in nb {
                    if !seen[q] && self.values[q] >= threshold {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
            cells.sort_unstable();
            out.push(cells);
        }
        out
    }
}

/// Runs every grid point as an independent simulation.
pub fn sweep(base: &NetworkSpec, o: &PhaseOpts, cfg: &EngineConfig, rate_norm: f64) -> CliResult<PhaseGrid> {
    if o.grid < 2 || !(o.max_norm > 0.0) {
        return Err(CliError::Usage("need --grid >= 2 and a positive --max-norm".into()));
    }
    if base.node(&o.probe).is_none() {
        return Err(CliError::Usage(format!("netlist has no probe `{}`", o.probe)));
    }
    let n = o.grid;
    let axis: Vec<f64> = (0..n).map(|i| o.max_norm * i as f64 / (n - 1) as f64).collect();
    let values = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let mut spec = base.clone();
            apply_inputs(&mut spec, &[axis[c / n], axis[c % n]], rate_norm)?;
            let r = simulate(&spec, cfg)?;
            Ok(r.probe_rates[&o.probe] / rate_norm)
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(PhaseGrid { n, axis, values })
}

pub fn run(run: &mut Run, o: &PhaseOpts) -> CliResult<()> {
    let base = super::simulate::load(run, &o.netlist)?;
    let seed = run.common.seed.unwrap_or(base.seed);
    run.note_seed(seed);
    let cfg = EngineConfig {
        duration: run.common.duration_ps.unwrap_or(DEFAULT_DURATION_PS),
        seed,
        ..EngineConfig::default()
    };
    let rn = run.common.rate_norm_ghz;
    let grid = sweep(&base, o, &cfg, rn)?;
    let path = run.write("phase.csv", &to_csv(&["r_a_norm", "r_b_norm", "r_out_norm"], grid.rows()))?;
    let lobes = grid.lobes(o.threshold);
    run.result("lobes", lobes.len());
    run.say(format!("{} high region(s) at threshold {}", lobes.len(), o.threshold));
    run.say(format!("wrote {}", path.display()));
    Ok(())
}
