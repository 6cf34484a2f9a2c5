#![allow(dead_code)]

use depasync::compiler::{MappingKind, PartitionStrategy};
use depasync::fixed::Fix;
use depasync::model::{Input, Network, Neuron, NeuronParams, Synapse};
use depasync::noc::Grid;
use depasync::SimConfig;

pub fn params() -> NeuronParams {
    NeuronParams { tau_m: Fix::from_int(2), v_rst: Fix::ZERO, g_l: Fix::ONE, v_th: Fix::ONE }
}

/// Four cores, c0 -> {c1, c2} -> c3, one neuron group per core. c1 is
/// driven hard at timestep 1 and spends that timestep sending spikes,
/// so c3 overtakes it and c0 runs into its window.
pub fn four_core_example() -> (Network, SimConfig) {
    let groups: [u32; 4] = [1, 2, 2, 4];
    let mut net = Network::empty(4, 1);
    let mut assignment = Vec::new();
    for (core, &n) in groups.iter().enumerate() {
        for _ in 0..n {
            net.neurons.push(Neuron { params: params(), v0: Fix::ZERO });
            assignment.push(core as u32);
        }
    }
    let ids = |core: usize| -> Vec<u32> {
        let start: u32 = groups[..core].iter().sum();
        (start..start + groups[core]).collect()
    };
    let weak = Fix::from_f64(0.01);
    for (from, to) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        for &src in &ids(from) {
            for &dst in &ids(to) {
                net.synapses.push(Synapse { src, dst, weight: weak, delay: 1 });
            }
        }
    }
    for neuron in ids(1) {
        net.inputs.push(Input { neuron, timestep: 1, current: Fix::from_int(4) });
    }
    let cfg = SimConfig {
        grid: Grid::new(2, 2),
        m: 2,
        c_update: 10,
        c_spike: 20,
        c_sched: 1,
        mapping: MappingKind::Plain,
        partition: PartitionStrategy::Explicit(assignment),
        trace_scheduler: true,
        ..Default::default()
    };
    (net, cfg)
}
