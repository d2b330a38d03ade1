// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::pulse::{ghz_to_per_ps, RATE_NORM_GHZ};

/// Soft-thresholded, soft-capped neuron transfer curve.
///
/// `out(r) = r_sat * tanh(gain * softplus_beta(r - r_thr) / r_sat)` where
/// `softplus_beta(x) = beta * ln(1 + exp(x / beta))`. All rates in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationModel {
    pub r_sat: f64,
    pub r_thr: f64,
    pub gain: f64,
    pub beta: f64,
}

impl Default for ActivationModel {
    fn default() -> Self {
        Self {
            r_sat: RATE_NORM_GHZ,
            r_thr: 20.0,
            gain: 1.0,
            beta: 2.0,
        }
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn sech2(u: f64) -> f64 {
    let t = u.tanh();
    1.0 - t * t
}

impl ActivationModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.r_sat > 0.0
            && self.gain > 0.0
            && self.beta > 0.0
            && self.r_thr.is_finite()
            && self.r_sat.is_finite()
            && self.gain.is_finite()
            && self.beta.is_finite();
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid activation model {self:?}")))
        }
    }

    fn inner(&self, r_net: f64) -> (f64, f64) {
        let z = (r_net - self.r_thr) / self.beta;
        let s = self.beta * softplus(z);
        (s, self.gain * s / self.r_sat)
    }

    pub fn eval(&self, r_net: f64) -> f64 {
        let (_, u) = self.inner(r_net);
        self.r_sat * u.tanh()
    }

    /// d out / d r_net.
    pub fn deriv(&self, r_net: f64) -> f64 {
        let (_, u) = self.inner(r_net);
        self.gain * sech2(u) * sigmoid((r_net - self.r_thr) / self.beta)
    }

    /// Gradient with respect to `(r_sat, r_thr, gain, beta)`.
    pub fn param_grad(&self, r_net: f64) -> [f64; 4] {
        let x = r_net - self.r_thr;
        let z = x / self.beta;
        let (s, u) = self.inner(r_net);
        let sh = sech2(u);
        let sig = sigmoid(z);
        let ds_dbeta = softplus(z) - z * sig;
        [
            u.tanh() - u * sh,
            -self.gain * sh * sig,
            sh * s,
            self.gain * sh * ds_dbeta,
        ]
    }

    pub fn to_text(&self) -> String {
        format!(
            "r_sat={}\nr_thr={}\ngain={}\nbeta={}\n",
            self.r_sat, self.r_thr, self.gain, self.beta
        )
    }

    /// Reads the `key=value` format written by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut vals = [None; 4];
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
            let slot = match k.trim() {
                "r_sat" => 0,
                "r_thr" => 1,
                "gain" => 2,
                "beta" => 3,
                other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", i + 1))),
            };
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            vals[slot] = Some(v);
        }
        let get = |i: usize, k: &str| vals[i].ok_or_else(|| Error::Parse(format!("missing `{k}`")));
        let m = Self {
            r_sat: get(0, "r_sat")?,
            r_thr: get(1, "r_thr")?,
            gain: get(2, "gain")?,
            beta: get(3, "beta")?,
        };
        m.validate()?;
        Ok(m)
    }
}

impl fmt::Display for ActivationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r_sat={:.4} GHz, r_thr={:.4} GHz, gain={:.4}, beta={:.4} GHz",
            self.r_sat, self.r_thr, self.gain, self.beta
        )
    }
}

/// Non-paralysable dead-time model of a merger: `R / (1 + R * t_dead)`.
pub fn merger_rate(t_dead_ps: f64, rates_ghz: &[f64]) -> f64 {
    let total: f64 = rates_ghz.iter().sum();
    total / (1.0 + ghz_to_per_ps(total) * t_dead_ps)
}

/// d merger_rate / d R for total input `total_ghz`.
pub fn merger_rate_grad(t_dead_ps: f64, total_ghz: f64) -> f64 {
    let d = 1.0 + ghz_to_per_ps(total_ghz) * t_dead_ps;
    1.0 / (d * d)
}
