use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{NeuronId, Timestep};

/// A single spike. Ordering is by timestep first, then neuron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(NeuronId, Timestep)", into = "(NeuronId, Timestep)")]
pub struct Spike {
    pub t: Timestep,
    pub neuron: NeuronId,
}

impl From<(NeuronId, Timestep)> for Spike {
    fn from((neuron, t): (NeuronId, Timestep)) -> Self {
        Spike { t, neuron }
    }
}

impl From<Spike> for (NeuronId, Timestep) {
    fn from(s: Spike) -> Self {
        (s.neuron, s.t)
    }
}

/// Sorted, duplicate-free set of spikes. Serialized as `[neuron, t]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpikeRaster {
    spikes: Vec<Spike>,
}

impl SpikeRaster {
    pub fn from_spikes(mut spikes: Vec<Spike>) -> Self {
        spikes.sort_unstable();
        let before = spikes.len();
        spikes.dedup();
        debug_assert_eq!(before, spikes.len(), "duplicate spikes in raster");
        SpikeRaster { spikes }
    }

    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Spike> {
        self.spikes.iter()
    }

    pub fn contains(&self, neuron: NeuronId, t: Timestep) -> bool {
        self.spikes.binary_search(&Spike { t, neuron }).is_ok()
    }

    pub fn restrict_to(&self, neurons: &[NeuronId]) -> SpikeRaster {
        let keep: HashSet<NeuronId> = neurons.iter().copied().collect();
        SpikeRaster {
            spikes: self.spikes.iter().copied().filter(|s| keep.contains(&s.neuron)).collect(),
        }
    }

    /// Earliest spike (by timestep, then neuron) present in exactly one of
    /// the two rasters.
    pub fn first_divergence(&self, other: &SpikeRaster) -> Option<Spike> {
        let (mut a, mut b) = (self.spikes.iter().peekable(), other.spikes.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return None,
                (Some(&&x), None) | (None, Some(&&x)) => return Some(x),
                (Some(&&x), Some(&&y)) => {
                    if x == y {
                        a.next();
                        b.next();
                    } else {
                        return Some(x.min(y));
                    }
                }
            }
        }
    }

    /// Mean fraction of neurons spiking per timestep.
    pub fn firing_rate(&self, n_neurons: usize, t_max: u32) -> f64 {
        if n_neurons == 0 || t_max == 0 {
            return 0.0;
        }
        self.spikes.len() as f64 / (n_neurons as f64 * f64::from(t_max))
    }

    /// Spike count per timestep.
    pub fn counts_per_timestep(&self, t_max: u32) -> Vec<u64> {
        let mut counts = vec![0u64; t_max as usize];
        for s in &self.spikes {
            if let Some(c) = counts.get_mut(s.t as usize) {
                *c += 1;
            }
        }
        counts
    }
}
