// SPDX-License-Identifier: Apache-2.0

//! Rate-coded MLP surrogate: forward pass, backpropagation, and lowering of
//! trained weights to a spiking netlist.

mod lower;
mod mlp;
mod train;
mod xor;

pub use lower::{apply_inputs, input_name, lower_to_network, lowered_models, neuron_name, output_name};
pub use mlp::{Dataset, MlpSpec, Sample};
pub use train::{train, TrainConfig, TrainReport};
pub use xor::{build_xor, xor_dataset, XorDevices, FULL_SCALE, LOGIC_HIGH, LOGIC_LOW, ON_TARGET, SOFT_KNEE_GHZ};
