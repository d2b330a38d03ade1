// SPDX-License-Identifier: Apache-2.0

use super::{Dataset, MlpSpec, Sample};
use crate::devices::{MergerParams, NeuronParams, SplitterParams, SynapseParams};
use crate::engine::EngineConfig;
use crate::pulse::RATE_NORM_GHZ;
use crate::ratemodel::{characterize_neuron, fit_activation, ActivationModel};

/// Top of the normalized input range; logic levels are fractions of it.
pub const FULL_SCALE: f64 = 2.0;
pub const LOGIC_LOW: f64 = 0.1 * FULL_SCALE;
pub const LOGIC_HIGH: f64 = 0.9 * FULL_SCALE;
/// Normalized output the trainer aims for on the two true corners.
pub const ON_TARGET: f64 = 1.2;
/// Minimum knee width given to fitted curves before training, GHz. The
/// measured curve is a hard rectifier, which leaves no gradient below it.
pub const SOFT_KNEE_GHZ: f64 = 2.0;

/// Device set the XOR network is built from.
///
/// A unit threshold lets every excitatory pulse fire, so the neuron passes
/// `exc - inh` with unit slope; the negative floor lets inhibitory pulses
/// bank against later excitation. Short refractory and dead times keep the
/// operating range below saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XorDevices {
    pub synapse: SynapseParams,
    pub neuron: NeuronParams,
    pub merger: MergerParams,
    pub splitter: SplitterParams,
}

impl Default for XorDevices {
    fn default() -> Self {
        Self {
            synapse: SynapseParams::default(),
            neuron: NeuronParams {
                theta: 1.0,
                tau_leak: 500.0,
                t_ref: 10.0,
                clamp_floor: -4.0,
            },
            merger: MergerParams { t_dead: 1.0 },
            splitter: SplitterParams::default(),
        }
    }
}

impl XorDevices {
    /// Characterises the neuron over `[0, FULL_SCALE]` and fits a transfer
    /// curve, widening its knee to at least [`SOFT_KNEE_GHZ`].
    pub fn activation(&self) -> crate::Result<ActivationModel> {
        let grid: Vec<f64> = (0..20).map(|i| i as f64 / 19.0 * FULL_SCALE * RATE_NORM_GHZ).collect();
        let pts = characterize_neuron(&self.neuron, &grid, &EngineConfig::default())?;
        let mut m = fit_activation(&pts)?.model;
        m.beta = m.beta.max(SOFT_KNEE_GHZ);
        Ok(m)
    }
}

/// The four logic corners with XOR targets.
pub fn xor_dataset(low: f64, high: f64, on: f64) -> crate::Result<Dataset> {
    let mut s = Vec::new();
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        let lvl = |x: bool| if x { high } else { low };
        s.push(Sample {
            input: vec![lvl(a), lvl(b)],
            target: vec![if a != b { on } else { 0.0 }],
        });
    }
    Dataset::new(s)
}

/// Two normalizers, two hidden neurons and one output, untrained.
///
/// Hidden neuron `j` is wired excitatory from normalizer `j` and inhibitory
/// from the other one; both drive the output excitatorily. Only the signs
/// matter: [`MlpSpec::randomize`] keeps them and redraws magnitudes.
pub fn build_xor() -> (MlpSpec, Dataset) {
    let d = XorDevices::default();
    let act = d.activation().expect("XOR neuron characterises");
    let mut mlp = MlpSpec::new(&[2, 2, 1], vec![act; 3], d.merger.t_dead).expect("valid architecture");
    mlp.weights[0] = vec![vec![0.5, -0.5], vec![-0.5, 0.5]];
    mlp.weights[1] = vec![vec![0.5], vec![0.5]];
    let data = xor_dataset(LOGIC_LOW, LOGIC_HIGH, ON_TARGET).expect("levels within range");
    (mlp, data)
}
