// SPDX-License-Identifier: Apache-2.0

//! Behavioural models of the SFQ primitives.
//!
//! Every device has a pure whole-train function (used directly and as the
//! reference in differential tests) and a small incremental state type that
//! the event engine steps one pulse at a time. The whole-train functions are
//! written on top of the same state types so both routes share semantics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::pulse::PulseTrain;

/// Grey-zone half width (in units of `sigma_gz`) used for weights of exactly 0 or 1.
pub const GREY_ZONE_CLAMP_SIGMAS: f64 = 6.0;

fn std_normal() -> Normal {
    Normal::standard()
}

/// Stochastic-pass synapse built from a balanced comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynapseParams {
    /// Critical current of the comparator junctions, µA.
    pub i_c: f64,
    /// Bias at which half the incoming fluxons pass, µA.
    pub i_center: f64,
    /// Width of the grey zone, µA.
    pub sigma_gz: f64,
    /// Applied bias, µA.
    pub i_b: f64,
}

impl Default for SynapseParams {
    fn default() -> Self {
        Self {
            i_c: 150.0,
            i_center: 100.0,
            sigma_gz: 15.0,
            i_b: 100.0,
        }
    }
}

impl SynapseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_gz > 0.0) || !self.sigma_gz.is_finite() {
            return Err(invalid(format!("sigma_gz must be > 0, got {}", self.sigma_gz)));
        }
        if !self.i_center.is_finite() || !self.i_b.is_finite() || !self.i_c.is_finite() {
            return Err(invalid("synapse currents must be finite"));
        }
        Ok(())
    }

    pub fn with_bias(self, i_b: f64) -> Self {
        Self { i_b, ..self }
    }
}

/// Probability that a fluxon at the input reaches the output.
pub fn pass_probability(p: &SynapseParams) -> f64 {
    std_normal().cdf((p.i_b - p.i_center) / p.sigma_gz)
}

/// Bias current that realises pass probability `w`.
///
/// Weights of exactly 0 and 1 map to the ±6σ edges of the grey zone.
pub fn bias_for_weight(p: &SynapseParams, w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(invalid(format!("weight {w} outside [0, 1]")));
    }
    let z = if w == 0.0 {
        -GREY_ZONE_CLAMP_SIGMAS
    } else if w == 1.0 {
        GREY_ZONE_CLAMP_SIGMAS
    } else {
        std_normal()
            .inverse_cdf(w)
            .clamp(-GREY_ZONE_CLAMP_SIGMAS, GREY_ZONE_CLAMP_SIGMAS)
    };
    Ok(p.i_center + z * p.sigma_gz)
}

/// Incremental Bernoulli gate.
#[derive(Debug, Clone)]
pub struct SynapseGate {
    pass: f64,
    rng: ChaCha8Rng,
}

impl SynapseGate {
    pub fn new(pass: f64, seed: u64) -> Self {
        Self {
            pass,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn pass_probability(&self) -> f64 {
        self.pass
    }

    /// Draws for one incoming pulse.
    pub fn admit(&mut self) -> bool {
        let u: f64 = self.rng.random();
        u < self.pass
    }
}

/// Keeps each input pulse independently with the synapse's pass probability.
pub fn synapse_gate(p: &SynapseParams, input: &PulseTrain, seed: u64) -> PulseTrain {
    let mut gate = SynapseGate::new(pass_probability(p), seed);
    let kept = input.iter().filter(|_| gate.admit()).collect();
    PulseTrain::from_sorted_unchecked(kept)
}

/// Leaky integrate-and-fire neuron parameters. States are in fluxon units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronParams {
    pub theta: f64,
    /// Leak time constant L1/R in ps; `f64::INFINITY` disables the leak.
    pub tau_leak: f64,
    /// Dead time after an output pulse, ps.
    pub t_ref: f64,
    pub clamp_floor: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            theta: 1.5,
            tau_leak: 50.0,
            t_ref: 30.0,
            clamp_floor: 0.0,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(invalid(format!("theta must be > 0, got {}", self.theta)));
        }
        if !(self.tau_leak > 0.0) {
            return Err(invalid(format!("tau_leak must be > 0, got {}", self.tau_leak)));
        }
        if !(self.t_ref >= 0.0) || !self.t_ref.is_finite() {
            return Err(invalid(format!("t_ref must be >= 0, got {}", self.t_ref)));
        }
        if !self.clamp_floor.is_finite() || self.clamp_floor >= self.theta {
            return Err(invalid("clamp_floor must be finite and below theta"));
        }
        Ok(())
    }
}

/// Which neuron input a pulse arrives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    // declaration order is the tie-break order at equal timestamps
    Inhibitory,
    Excitatory,
}

/// Running state of one neuron.
#[derive(Debug, Clone)]
pub struct NeuronState {
    params: NeuronParams,
    state: f64,
    last_time: f64,
    last_output: Option<f64>,
}

/// What happened when the neuron absorbed a pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronStep {
    /// State just before the pulse, after leaking.
    pub before: f64,
    /// State after the pulse was absorbed and any threshold handled.
    pub after: f64,
    pub fired: bool,
}

impl NeuronState {
    pub fn new(params: NeuronParams) -> Self {
        Self {
            params,
            state: params.clamp_floor.max(0.0),
            last_time: 0.0,
            last_output: None,
        }
    }

    pub fn state(&self) -> f64 {
        self.state
    }

    pub fn step(&mut self, t: f64, polarity: Polarity) -> NeuronStep {
        let p = &self.params;
        let dt = (t - self.last_time).max(0.0);
        if p.tau_leak.is_finite() && dt > 0.0 {
            self.state *= (-dt / p.tau_leak).exp();
        }
        self.last_time = t;
        let before = self.state;
        self.state += match polarity {
            Polarity::Excitatory => 1.0,
            Polarity::Inhibitory => -1.0,
        };
        if self.state < p.clamp_floor {
            self.state = p.clamp_floor;
        }
        let mut fired = false;
        if self.state >= p.theta {
            // inside the dead time the flux still escapes, just without a pulse
            let ready = self.last_output.is_none_or(|last| t - last >= p.t_ref);
            if ready {
                fired = true;
                self.last_output = Some(t);
            }
            self.state -= p.theta;
        }
        NeuronStep {
            before,
            after: self.state,
            fired,
        }
    }
}

/// Sampled state and output of a neuron run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeuronTrace {
    /// `(t, state)` pairs: the leaked state just before and the state just
    /// after every input pulse.
    pub samples: Vec<(f64, f64)>,
    pub output: PulseTrain,
}

impl NeuronTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_ps,state\n");
        for (t, v) in &self.samples {
            s.push_str(&format!("{t},{v}\n"));
        }
        s
    }
}

/// Merges the two inputs into one time-ordered event list, inhibitory first on ties.
pub(crate) fn interleave(exc: &PulseTrain, inh: &PulseTrain) -> Vec<(f64, Polarity)> {
    let mut events: Vec<(f64, Polarity)> = exc
        .iter()
        .map(|t| (t, Polarity::Excitatory))
        .chain(inh.iter().map(|t| (t, Polarity::Inhibitory)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    events
}

pub fn neuron_process(p: &NeuronParams, excitatory: &PulseTrain, inhibitory: &PulseTrain) -> NeuronTrace {
    let mut neuron = NeuronState::new(*p);
    let mut trace = NeuronTrace::default();
    let mut out = Vec::new();
    for (t, pol) in interleave(excitatory, inhibitory) {
        let step = neuron.step(t, pol);
        trace.samples.push((t, step.before));
        trace.samples.push((t, step.after));
        if step.fired {
            out.push(t);
        }
    }
    trace.output = PulseTrain::from_sorted_unchecked(out);
    trace
}

/// Confluence buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergerParams {
    pub t_dead: f64,
}

impl Default for MergerParams {
    fn default() -> Self {
        Self { t_dead: 30.0 }
    }
}

impl MergerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_dead >= 0.0) || !self.t_dead.is_finite() {
            return Err(invalid(format!("t_dead must be >= 0, got {}", self.t_dead)));
        }
        Ok(())
    }
}

/// Dead-time gate of a merger.
#[derive(Debug, Clone, Default)]
pub struct MergerState {
    t_dead: f64,
    last: Option<f64>,
}

impl MergerState {
    pub fn new(p: MergerParams) -> Self {
        Self {
            t_dead: p.t_dead,
            last: None,
        }
    }

    pub fn admit(&mut self, t: f64) -> bool {
        let ok = self
            .last
            .is_none_or(|last| t > last && t - last >= self.t_dead);
        if ok {
            self.last = Some(t);
        }
        ok
    }
}

pub fn merger_process(p: &MergerParams, inputs: &[PulseTrain]) -> PulseTrain {
    let mut all: Vec<f64> = inputs.iter().flat_map(|t| t.iter()).collect();
    all.sort_by(f64::total_cmp);
    let mut gate = MergerState::new(*p);
    PulseTrain::from_sorted_unchecked(all.into_iter().filter(|&t| gate.admit(t)).collect())
}

/// Splitter stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterParams {
    pub delay: f64,
    pub fanout: usize,
}

impl Default for SplitterParams {
    fn default() -> Self {
        Self {
            delay: 5.0,
            fanout: 2,
        }
    }
}

impl SplitterParams {
    pub fn validate(&self) -> Result<()> {
        if self.fanout < 2 {
            return Err(invalid(format!("fanout must be >= 2, got {}", self.fanout)));
        }
        if !(self.delay >= 0.0) || !self.delay.is_finite() {
            return Err(invalid(format!("delay must be >= 0, got {}", self.delay)));
        }
        Ok(())
    }
}

pub fn splitter_process(p: &SplitterParams, input: &PulseTrain) -> Vec<PulseTrain> {
    let shifted = PulseTrain::from_sorted_unchecked(input.iter().map(|t| t + p.delay).collect());
    vec![shifted; p.fanout]
}
