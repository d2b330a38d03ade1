// SPDX-License-Identifier: Apache-2.0

//! Steady-state rate abstraction of a network.
//!
//! Under rate coding a synapse scales its input rate by its pass
//! probability, a merger adds its inputs subject to dead-time saturation and
//! a neuron maps its net input rate through a smooth activation. This module
//! provides those maps, their derivatives, and the tools to measure and fit
//! a neuron's activation from event-driven runs.

mod activation;
mod characterize;
mod fit;
mod propagate;

pub use activation::{merger_rate, merger_rate_grad, ActivationModel};
pub use characterize::{characterize_neuron, characterize_neuron_with};
pub use fit::{fit_activation, FitReport, MIN_FIT_SAMPLES};
pub use propagate::{propagate_rates, uniform_models, RateVector};
