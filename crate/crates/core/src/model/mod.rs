//! Workload representation: LIF neurons, delayed synapses, external input.

mod gen;
mod lif;
mod raster;
mod reference;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::fixed::Fix;

pub use gen::{
    gen_layered, gen_synthetic, LayeredSpec, RateKnobs, RotatingBurstSpec, SyntheticSpec, SCALING_SHAPES,
    WorkloadSpec,
};
pub use lif::{lif_step, LifOutcome};
pub use raster::{Spike, SpikeRaster};
pub use reference::{reference_run, reference_run_with_stats, ReferenceStats};

pub type NeuronId = u32;
pub type Timestep = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronParams {
    /// Membrane time constant in timesteps.
    pub tau_m: Fix,
    pub v_rst: Fix,
    /// Leak conductance.
    pub g_l: Fix,
    pub v_th: Fix,
}

impl NeuronParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.tau_m <= Fix::ZERO {
            return Err(format!("tau_m must be positive, got {}", self.tau_m));
        }
        if self.g_l <= Fix::ZERO {
            return Err(format!("g_l must be positive, got {}", self.g_l));
        }
        if self.v_th <= self.v_rst {
            return Err(format!("v_th {} must exceed v_rst {}", self.v_th, self.v_rst));
        }
        Ok(())
    }
}

/// Membrane potential plus the input summed for the upcoming update.
///
/// `acc` is a raw Q16.16 value held at 64 bits: integer addition makes the
/// total independent of spike arrival order, and the wider type keeps that
/// true for any realistic fan-in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronState {
    pub v: Fix,
    pub acc: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neuron {
    #[serde(flatten)]
    pub params: NeuronParams,
    pub v0: Fix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synapse {
    pub src: NeuronId,
    pub dst: NeuronId,
    pub weight: Fix,
    pub delay: u32,
}

/// Current injected into `neuron` at `timestep`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    pub neuron: NeuronId,
    pub timestep: Timestep,
    pub current: Fix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub neurons: Vec<Neuron>,
    pub synapses: Vec<Synapse>,
    pub inputs: Vec<Input>,
    pub t_max: u32,
    pub max_delay: u32,
    /// Sizes of consecutive neuron groups (layers). When present the
    /// partitioner splits layer by layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<u32>>,
}

impl Network {
    pub fn empty(t_max: u32, max_delay: u32) -> Self {
        Network {
            neurons: Vec::new(),
            synapses: Vec::new(),
            inputs: Vec::new(),
            t_max,
            max_delay,
            layers: None,
        }
    }

    pub fn n_neurons(&self) -> usize {
        self.neurons.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.neurons.len() as u64;
        if self.max_delay == 0 {
            return Err(ModelError::Invalid("max_delay must be at least 1".into()));
        }
        for (i, neuron) in self.neurons.iter().enumerate() {
            neuron
                .params
                .validate()
                .map_err(|e| ModelError::Invalid(format!("neuron {i}: {e}")))?;
        }
        for (i, s) in self.synapses.iter().enumerate() {
            if u64::from(s.src) >= n || u64::from(s.dst) >= n {
                return Err(ModelError::Invalid(format!(
                    "synapse {i} references neuron outside 0..{n}"
                )));
            }
            if s.delay == 0 || s.delay > self.max_delay {
                return Err(ModelError::Invalid(format!(
                    "synapse {i} delay {} outside 1..={}",
                    s.delay, self.max_delay
                )));
            }
        }
        for (i, inp) in self.inputs.iter().enumerate() {
            if u64::from(inp.neuron) >= n {
                return Err(ModelError::Invalid(format!("input {i} targets unknown neuron")));
            }
            if inp.timestep >= self.t_max {
                return Err(ModelError::Invalid(format!(
                    "input {i} at timestep {} beyond t_max {}",
                    inp.timestep, self.t_max
                )));
            }
        }
        if let Some(layers) = &self.layers {
            let total: u64 = layers.iter().map(|&l| u64::from(l)).sum();
            if total != n {
                return Err(ModelError::Invalid(format!(
                    "layer sizes sum to {total}, network has {n} neurons"
                )));
            }
        }
        Ok(())
    }

    /// Outgoing synapse indices grouped by source neuron.
    pub fn fanout_index(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.neurons.len()];
        for (i, s) in self.synapses.iter().enumerate() {
            out[s.src as usize].push(i);
        }
        out
    }

    /// External input grouped by timestep.
    pub fn inputs_by_timestep(&self) -> Vec<Vec<(NeuronId, Fix)>> {
        let mut by_t = vec![Vec::new(); self.t_max as usize];
        for inp in &self.inputs {
            if let Some(slot) = by_t.get_mut(inp.timestep as usize) {
                slot.push((inp.neuron, inp.current));
            }
        }
        by_t
    }

    /// Return a copy with neurons reordered so that new neuron `i` is old
    /// neuron `order[i]`. Synapses and inputs are renumbered to match.
    pub fn permuted(&self, order: &[NeuronId]) -> Network {
        let mut new_id = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old as usize] = new as u32;
        }
        Network {
            neurons: order.iter().map(|&o| self.neurons[o as usize]).collect(),
            synapses: self
                .synapses
                .iter()
                .map(|s| Synapse {
                    src: new_id[s.src as usize],
                    dst: new_id[s.dst as usize],
                    ..*s
                })
                .collect(),
            inputs: self
                .inputs
                .iter()
                .map(|i| Input {
                    neuron: new_id[i.neuron as usize],
                    ..*i
                })
                .collect(),
            t_max: self.t_max,
            max_delay: self.max_delay,
            layers: None,
        }
    }

    /// The first `t_max` timesteps only; later input is dropped.
    pub fn truncated(&self, t_max: u32) -> Network {
        let mut net = self.clone();
        net.t_max = t_max;
        net.inputs.retain(|i| i.timestep < t_max);
        net
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let net: Network = serde_json::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))?;
        net.validate()?;
        Ok(net)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        crate::io::write_atomic(path, self.to_json().as_bytes())
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
    }
}
