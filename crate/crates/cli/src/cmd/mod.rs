// SPDX-License-Identifier: Apache-2.0

//! One module per subcommand family.

pub mod neuron;
pub mod phase;
pub mod simulate;
pub mod synapse;
pub mod xor;
