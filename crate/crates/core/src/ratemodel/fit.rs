// SPDX-License-Identifier: Apache-2.0

//! Levenberg–Marquardt fit of an [`ActivationModel`] to measured rate pairs.

use super::ActivationModel;
use crate::error::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub model: ActivationModel,
    /// Root-mean-square residual, GHz.
    pub rms: f64,
    pub iterations: usize,
}

// r_sat, gain and beta are fitted in log space to stay positive.
fn unpack(v: &[f64; 4]) -> ActivationModel {
    ActivationModel {
        r_sat: v[0].exp(),
        r_thr: v[1],
        gain: v[2].exp(),
        beta: v[3].exp(),
    }
}

fn pack(m: &ActivationModel) -> [f64; 4] {
    [m.r_sat.ln(), m.r_thr, m.gain.ln(), m.beta.ln()]
}

fn sse(m: &ActivationModel, samples: &[(f64, f64)]) -> f64 {
    samples.iter().map(|&(x, y)| (m.eval(x) - y).powi(2)).sum()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn levenberg_marquardt(start: ActivationModel, samples: &[(f64, f64)]) -> (ActivationModel, f64, usize) {
    let mut v = pack(&start);
    let mut cur = unpack(&v);
    let mut cost = sse(&cur, samples);
    let mut lambda = 1e-3;
    let mut iters = 0;
    for it in 0..2000 {
        iters = it + 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for &(x, y) in samples {
            let g = cur.param_grad(x);
            let j = [g[0] * cur.r_sat, g[1], g[2] * cur.gain, g[3] * cur.beta];
            let r = cur.eval(x) - y;
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += lambda * jtj[k][k].max(1e-12);
            }
            let Some(step) = solve4(damped, jtr.map(|g| -g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial_v = [v[0] + step[0], v[1] + step[1], v[2] + step[2], v[3] + step[3]];
            let trial = unpack(&trial_v);
            let trial_cost = sse(&trial, samples);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                v = trial_v;
                cur = trial;
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-14 || step.iter().all(|s| s.abs() < 1e-13) {
                    return (cur, cost, iters);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (cur, cost, iters)
}

/// Least-squares fit over at least [`MIN_FIT_SAMPLES`] `(r_in, r_out)` pairs.
///
/// Several starting points are tried (threshold guesses spread over the
/// input range, a few softness scales) and the best converged fit is kept.
pub fn fit_activation(samples: &[(f64, f64)]) -> Result<FitReport> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("samples must be finite".into()));
    }
    let y_max = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    if y_max <= 0.0 {
        return Err(Error::Fit("all output rates are zero".into()));
    }
    let x_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let x_max = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let span = (x_max - x_min).max(1e-9);
    // first input where the output leaves the floor
    let onset = samples
        .iter()
        .filter(|s| s.1 > 0.02 * y_max)
        .map(|s| s.0)
        .fold(f64::INFINITY, f64::min);

    let mut best: Option<(ActivationModel, f64, usize)> = None;
    for thr_frac in [-0.1, 0.0, 0.15, 0.3, 0.5, 0.7] {
        let r_thr = if thr_frac == 0.0 { onset } else { onset + thr_frac * span };
        for beta_frac in [0.005, 0.03, 0.15] {
            for sat_scale in [1.05, 1.5] {
                let run = (x_max - r_thr).max(0.05 * span);
                let start = ActivationModel {
                    r_sat: sat_scale * y_max,
                    r_thr,
                    gain: (y_max / run).max(1e-3),
                    beta: beta_frac * span,
                };
                let (m, cost, it) = levenberg_marquardt(start, samples);
                if m.validate().is_ok() && best.as_ref().is_none_or(|b| cost < b.1) {
                    best = Some((m, cost, it));
                }
            }
        }
    }
    let (model, cost, iterations) = best.ok_or_else(|| Error::Fit("no starting point converged".into()))?;
    Ok(FitReport {
        model,
        rms: (cost / samples.len() as f64).sqrt(),
        iterations,
    })
}
