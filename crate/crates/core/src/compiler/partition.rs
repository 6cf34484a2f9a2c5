use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CompileError;
use crate::fixed::Fix;
use crate::model::{Network, NeuronId};

/// Per-core memory budget, in neurons and stored synapses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Capacity {
    pub max_neurons: u64,
    pub max_synapses: u64,
}

impl Default for Capacity {
    fn default() -> Self {
        Capacity { max_neurons: 4096, max_synapses: 1 << 20 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionStrategy {
    /// Layer-by-layer when the network carries layer sizes, else round-robin.
    #[default]
    Auto,
    RoundRobin,
    Layered,
    /// Core id for every neuron.
    Explicit(Vec<u32>),
}

/// One outgoing synapse as seen from the source core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fanout {
    pub core: u32,
    /// Row in the target core's synapse table.
    pub synapse: u32,
    pub weight: Fix,
    pub delay: u32,
}

/// Synapse-table row held by the receiving core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InSynapse {
    /// Local index of the postsynaptic neuron.
    pub target: u32,
    pub weight: Fix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicCore {
    pub id: u32,
    pub neuron_ids: Vec<NeuronId>,
    /// Indexed by local neuron.
    pub fanout: Vec<Vec<Fanout>>,
    pub synapses: Vec<InSynapse>,
}

impl LogicCore {
    pub fn n_synapses_out(&self) -> usize {
        self.fanout.iter().map(Vec::len).sum()
    }
}

/// Core id per neuron for the given strategy.
pub fn assign(net: &Network, n_cores: usize, strategy: &PartitionStrategy) -> Result<Vec<u32>, CompileError> {
    if n_cores == 0 {
        return Err(CompileError::Invalid("need at least one core".into()));
    }
    let n = net.n_neurons();
    let by_layers = match strategy {
        PartitionStrategy::Explicit(a) => {
            if a.len() != n {
                return Err(CompileError::Invalid(format!(
                    "explicit assignment has {} entries for {n} neurons",
                    a.len()
                )));
            }
            if let Some(bad) = a.iter().find(|&&c| c as usize >= n_cores) {
                return Err(CompileError::Invalid(format!("explicit assignment names core {bad}")));
            }
            return Ok(a.clone());
        }
        PartitionStrategy::RoundRobin => None,
        PartitionStrategy::Layered => Some(
            net.layers
                .clone()
                .ok_or_else(|| CompileError::Invalid("network has no layer structure".into()))?,
        ),
        PartitionStrategy::Auto => net.layers.clone(),
    };
    Ok(match by_layers {
        None => (0..n).map(|i| (i % n_cores) as u32).collect(),
        Some(layers) => layered_assignment(&layers, n_cores),
    })
}

fn chunk_sizes(len: u32, parts: u32) -> impl Iterator<Item = u32> {
    (0..parts).map(move |j| len / parts + u32::from(j < len % parts))
}

/// Give every layer a share of cores proportional to its size (at least
/// one, at most one per neuron), then split each layer into equal
/// contiguous chunks.
fn layered_assignment(layers: &[u32], n_cores: usize) -> Vec<u32> {
    let total: u64 = layers.iter().map(|&l| u64::from(l)).sum();
    let mut out = Vec::with_capacity(total as usize);
    if layers.len() > n_cores || total == 0 {
        for (core, size) in chunk_sizes(total as u32, n_cores as u32).enumerate() {
            out.extend(std::iter::repeat_n(core as u32, size as usize));
        }
        return out;
    }
    let quota: Vec<f64> = layers
        .iter()
        .map(|&l| l as f64 * n_cores as f64 / total as f64)
        .collect();
    let mut alloc: Vec<u32> = layers
        .iter()
        .zip(&quota)
        .map(|(&l, &q)| (q.floor() as u32).clamp(1, l))
        .collect();
    let mut sum: u32 = alloc.iter().sum();
    while sum > n_cores as u32 {
        let i = (0..layers.len())
            .filter(|&i| alloc[i] > 1)
            .min_by(|&a, &b| {
                (quota[a] - f64::from(alloc[a])).total_cmp(&(quota[b] - f64::from(alloc[b])))
            })
            .expect("more layers than cores handled above");
        alloc[i] -= 1;
        sum -= 1;
    }
    while sum < n_cores as u32 {
        let Some(i) = (0..layers.len())
            .filter(|&i| alloc[i] < layers[i])
            .max_by(|&a, &b| {
                (quota[a] - f64::from(alloc[a]))
                    .total_cmp(&(quota[b] - f64::from(alloc[b])))
                    .then(b.cmp(&a))
            })
        else {
            break;
        };
        alloc[i] += 1;
        sum += 1;
    }
    let mut next_core = 0u32;
    for (&size, &parts) in layers.iter().zip(&alloc) {
        for chunk in chunk_sizes(size, parts) {
            out.extend(std::iter::repeat_n(next_core, chunk as usize));
            next_core += 1;
        }
    }
    out
}

/// Swap `fraction` of core 0's neurons with neurons drawn round-robin from
/// the other cores, highest core id first. Core 0 normally holds the input
/// layer and has no pre-dependencies; after the exchange it holds deep-layer
/// neurons fed by cores downstream of it, closing dependency cycles through
/// core 0.
pub fn exchange_with_core0(assignment: &[u32], fraction: f64, seed: u64) -> Vec<u32> {
    let mut out = assignment.to_vec();
    let n_cores = assignment.iter().copied().max().map_or(0, |m| m + 1);
    if n_cores < 2 || fraction <= 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_cores as usize];
    for (i, &c) in assignment.iter().enumerate() {
        members[c as usize].push(i);
    }
    for m in &mut members {
        m.shuffle(&mut rng);
    }
    let k = ((members[0].len() as f64) * fraction.min(1.0)).round() as usize;
    let mut donors = (1..n_cores as usize).rev().cycle();
    for &ours in members[0].clone().iter().take(k) {
        let Some(donor) = donors.by_ref().take(n_cores as usize).find(|&d| !members[d].is_empty()) else {
            break;
        };
        let theirs = members[donor].pop().expect("checked non-empty");
        out[ours] = donor as u32;
        out[theirs] = 0;
    }
    out
}

/// Materialize logic cores from a neuron-to-core assignment.
pub fn build_cores(
    net: &Network,
    assignment: &[u32],
    n_cores: usize,
    capacity: &Capacity,
) -> Result<Vec<LogicCore>, CompileError> {
    let mut cores: Vec<LogicCore> = (0..n_cores)
        .map(|id| LogicCore {
            id: id as u32,
            neuron_ids: Vec::new(),
            fanout: Vec::new(),
            synapses: Vec::new(),
        })
        .collect();
    let mut local = vec![0u32; net.n_neurons()];
    for (neuron, &core) in assignment.iter().enumerate() {
        let c = &mut cores[core as usize];
        local[neuron] = c.neuron_ids.len() as u32;
        c.neuron_ids.push(neuron as u32);
        c.fanout.push(Vec::new());
    }
    for syn in &net.synapses {
        let src_core = assignment[syn.src as usize] as usize;
        let dst_core = assignment[syn.dst as usize] as usize;
        let row = cores[dst_core].synapses.len() as u32;
        cores[dst_core].synapses.push(InSynapse { target: local[syn.dst as usize], weight: syn.weight });
        cores[src_core].fanout[local[syn.src as usize] as usize].push(Fanout {
            core: dst_core as u32,
            synapse: row,
            weight: syn.weight,
            delay: syn.delay,
        });
    }
    for c in &cores {
        let (neurons, synapses) = (c.neuron_ids.len() as u64, c.synapses.len() as u64);
        if neurons > capacity.max_neurons || synapses > capacity.max_synapses {
            return Err(CompileError::CapacityExceeded {
                core: c.id,
                neurons,
                synapses,
                max_neurons: capacity.max_neurons,
                max_synapses: capacity.max_synapses,
            });
        }
    }
    Ok(cores)
}

pub fn partition(
    net: &Network,
    n_cores: usize,
    capacity: &Capacity,
    strategy: &PartitionStrategy,
) -> Result<Vec<LogicCore>, CompileError> {
    net.validate()?;
    let assignment = assign(net, n_cores, strategy)?;
    build_cores(net, &assignment, n_cores, capacity)
}
