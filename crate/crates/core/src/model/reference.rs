//! Sequential time-driven interpreter. This is the oracle every simulated
//! accelerator mode is compared against.

use crate::error::ModelError;

use super::{lif_step, Network, NeuronState, Spike, SpikeRaster};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReferenceStats {
    pub neuron_updates: u64,
    pub synapse_events: u64,
    pub saturations: u64,
}

pub fn reference_run(net: &Network) -> Result<SpikeRaster, ModelError> {
    reference_run_with_stats(net).map(|(r, _)| r)
}

/// Runs timesteps `0..t_max`. A spike fired at `t` over a synapse with delay
/// `d` lands in the target's accumulator for `t + d`; since `d >= 1` no
/// neuron can influence another within the same timestep and the result is
/// independent of iteration order.
pub fn reference_run_with_stats(net: &Network) -> Result<(SpikeRaster, ReferenceStats), ModelError> {
    net.validate()?;
    let n = net.n_neurons();
    let ring_len = net.max_delay as usize + 1;
    let mut ring = vec![vec![0i64; n]; ring_len];
    let mut states: Vec<NeuronState> =
        net.neurons.iter().map(|nr| NeuronState { v: nr.v0, acc: 0 }).collect();
    let fanout = net.fanout_index();
    let inputs = net.inputs_by_timestep();
    let mut spikes = Vec::new();
    let mut stats = ReferenceStats::default();

    for t in 0..net.t_max {
        let slot = t as usize % ring_len;
        let mut acc = std::mem::replace(&mut ring[slot], vec![0i64; n]);
        for &(neuron, current) in &inputs[t as usize] {
            acc[neuron as usize] += i64::from(current.raw());
        }
        for (i, state) in states.iter_mut().enumerate() {
            state.acc = acc[i];
            let out = lif_step(state, &net.neurons[i].params);
            stats.neuron_updates += 1;
            stats.saturations += u64::from(out.saturated);
            if !out.fired {
                continue;
            }
            spikes.push(Spike { neuron: i as u32, t });
            for &si in &fanout[i] {
                let syn = &net.synapses[si];
                let target = t + syn.delay;
                if target < net.t_max {
                    ring[target as usize % ring_len][syn.dst as usize] += i64::from(syn.weight.raw());
                    stats.synapse_events += 1;
                }
            }
        }
    }
    Ok((SpikeRaster::from_spikes(spikes), stats))
}
