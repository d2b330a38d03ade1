// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use fluxnet_core::devices::MergerParams;
use fluxnet_core::trainer::{apply_inputs, build_xor, lower_to_network, XorDevices};
use fluxnet_core::NetworkSpec;

/// The untrained XOR network lowered to devices, driven at `(high, low)`.
pub fn xor_network(duration_ps: f64) -> NetworkSpec {
    let (mlp, _) = build_xor();
    let d = XorDevices::default();
    let mp = MergerParams { t_dead: mlp.t_dead };
    let mut spec = lower_to_network(&mlp, &d.synapse, &d.neuron, &mp, &d.splitter).expect("lowering");
    spec.duration = duration_ps;
    apply_inputs(&mut spec, &[1.8, 0.2], mlp.rate_norm).expect("inputs");
    spec
}
