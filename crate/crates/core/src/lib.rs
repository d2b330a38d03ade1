// SPDX-License-Identifier: Apache-2.0

//! Behavioural simulation and training of spiking networks built from
//! single-flux-quantum primitives.
//!
//! * [`pulse`]: pulse trains, generators, rate measurement, constants
//! * [`devices`]: stochastic-pass synapse, LIF neuron, merger, splitter
//! * [`netgraph`]: netlist format, validation, splitter-tree expansion
//! * [`engine`]: deterministic discrete-event simulation and energy accounting
//! * [`ratemodel`]: steady-state rate model, activation characterisation and fitting
//! * [`trainer`]: rate-coded MLP training and lowering to a netlist

pub mod devices;
pub mod engine;
pub mod error;
pub mod netgraph;
pub mod pulse;
pub mod ratemodel;
pub mod stream;
pub mod trainer;

pub use devices::{MergerParams, NeuronParams, NeuronTrace, SplitterParams, SynapseParams};
pub use engine::{energy_report, simulate, simulate_driven, EnergyReport, EngineConfig, SimResult};
pub use error::{Error, Result};
pub use netgraph::{expand_fanout, parse_netlist, validate, Diagnostic, NetworkSpec};
pub use pulse::{measure_rate, poisson_train, regular_train, PulseTrain, RateMeasurement};
pub use ratemodel::{ActivationModel, RateVector};
