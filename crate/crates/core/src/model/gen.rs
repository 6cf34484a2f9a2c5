//! Workload generators. All are deterministic functions of their spec,
//! including the seed.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::fixed::Fix;

use super::{Input, Network, Neuron, NeuronParams, Synapse};

fn uniform_fix(rng: &mut ChaCha8Rng, lo: Fix, hi: Fix) -> Fix {
    if lo >= hi {
        lo
    } else {
        Fix::from_raw(rng.gen_range(lo.raw()..=hi.raw()))
    }
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), ModelError> {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
        return Err(ModelError::Invalid(format!("{name} range {r:?} is not ordered")));
    }
    Ok(())
}

/// Ranges that per-neuron `tau_m` and `v_rst` are drawn from. Raising
/// `v_rst` (closer to threshold) or lowering `tau_m` raises the firing rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateKnobs {
    pub tau_m: [f64; 2],
    pub v_rst: [f64; 2],
}

impl Default for RateKnobs {
    fn default() -> Self {
        RateKnobs::level(0.0)
    }
}

impl RateKnobs {
    /// One-dimensional firing-rate dial. `0.0` is the quiet default; the
    /// rate grows with `x` up to about `1.0`.
    pub fn level(x: f64) -> Self {
        let x = x.clamp(0.0, 1.0);
        RateKnobs {
            tau_m: [2.0, 4.0 - 2.0 * x],
            v_rst: [0.0, 0.75 * x],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_neurons: u32,
    pub n_synapses: u64,
    pub frac_inhibitory: f64,
    pub rate: RateKnobs,
    pub t_max: u32,
    pub max_delay: u32,
    /// Per-neuron, per-timestep probability of an input pulse.
    pub input_rate: f64,
    pub input_current: f64,
    pub w_exc: f64,
    pub w_inh: f64,
    pub v_th: f64,
    pub g_l: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_neurons: 1000,
            n_synapses: 50_000,
            frac_inhibitory: 0.2,
            rate: RateKnobs::default(),
            t_max: 100,
            max_delay: 2,
            input_rate: 0.05,
            input_current: 2.5,
            w_exc: 0.5,
            w_inh: 2.5,
            v_th: 1.0,
            g_l: 1.0,
            seed: 0,
        }
    }
}

/// Scaling-study sizes as (cores, neurons, synapses).
pub const SCALING_SHAPES: [(u32, u32, u64); 5] = [
    (16, 10_240, 903_718),
    (32, 14_481, 2_027_922),
    (64, 20_480, 4_048_000),
    (128, 28_962, 8_043_888),
    (256, 40_960, 16_096_000),
];

impl SyntheticSpec {
    /// Scaling-study workload for `cores` cores with both counts divided by
    /// `divisor`. Weights shrink with the fan-in so that the recurrent drive
    /// per neuron matches the default workload.
    pub fn scaled(cores: u32, divisor: u32, seed: u64) -> Option<Self> {
        let &(_, n, s) = SCALING_SHAPES.iter().find(|r| r.0 == cores)?;
        let base = SyntheticSpec::default();
        let (n, s) = (n / divisor.max(1), s / u64::from(divisor.max(1)));
        let gain = (base.n_synapses as f64 / f64::from(base.n_neurons)) / (s as f64 / f64::from(n.max(1)));
        Some(SyntheticSpec {
            n_neurons: n,
            n_synapses: s,
            w_exc: base.w_exc * gain,
            w_inh: base.w_inh * gain,
            seed,
            ..base
        })
    }
}

/// Random recurrent network with an excitatory/inhibitory split (excitatory
/// neurons first) and Poisson external input.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Network, ModelError> {
    let n = u64::from(spec.n_neurons);
    if spec.n_synapses > n * n {
        return Err(ModelError::Invalid(format!(
            "{} synapses cannot fit among {} neurons",
            spec.n_synapses, spec.n_neurons
        )));
    }
    if !(0.0..=1.0).contains(&spec.frac_inhibitory) {
        return Err(ModelError::Invalid("frac_inhibitory must be in [0, 1]".into()));
    }
    if !(0.0..=1.0).contains(&spec.input_rate) {
        return Err(ModelError::Invalid("input_rate must be in [0, 1]".into()));
    }
    if spec.max_delay == 0 {
        return Err(ModelError::Invalid("max_delay must be at least 1".into()));
    }
    check_range("tau_m", spec.rate.tau_m)?;
    check_range("v_rst", spec.rate.v_rst)?;
    if spec.rate.tau_m[0] <= 0.0 {
        return Err(ModelError::Invalid("tau_m must be positive".into()));
    }
    if spec.rate.v_rst[1] >= spec.v_th {
        return Err(ModelError::Invalid("v_rst range must stay below v_th".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let v_th = Fix::from_f64(spec.v_th);
    let g_l = Fix::from_f64(spec.g_l);
    let (tau_lo, tau_hi) = (Fix::from_f64(spec.rate.tau_m[0]), Fix::from_f64(spec.rate.tau_m[1]));
    let (rst_lo, rst_hi) = (Fix::from_f64(spec.rate.v_rst[0]), Fix::from_f64(spec.rate.v_rst[1]));
    let neurons: Vec<Neuron> = (0..spec.n_neurons)
        .map(|_| {
            let v_rst = uniform_fix(&mut rng, rst_lo, rst_hi);
            Neuron {
                params: NeuronParams {
                    tau_m: uniform_fix(&mut rng, tau_lo, tau_hi),
                    v_rst,
                    g_l,
                    v_th,
                },
                v0: v_rst,
            }
        })
        .collect();

    let n_inh = (f64::from(spec.n_neurons) * spec.frac_inhibitory).round() as u32;
    let n_exc = spec.n_neurons - n_inh;
    let w_exc = Fix::from_f64(spec.w_exc);
    let w_inh = Fix::from_f64(-spec.w_inh);
    let mut pairs: Vec<u64> = if spec.n_synapses == 0 {
        Vec::new()
    } else {
        index::sample(&mut rng, (n * n) as usize, spec.n_synapses as usize)
            .into_iter()
            .map(|i| i as u64)
            .collect()
    };
    pairs.sort_unstable();
    let synapses = pairs
        .into_iter()
        .map(|pair| {
            let src = (pair / n) as u32;
            let dst = (pair % n) as u32;
            let weight = if src < n_exc {
                uniform_fix(&mut rng, Fix::ZERO, w_exc)
            } else {
                uniform_fix(&mut rng, w_inh, Fix::ZERO)
            };
            Synapse { src, dst, weight, delay: rng.gen_range(1..=spec.max_delay) }
        })
        .collect();

    let current = Fix::from_f64(spec.input_current);
    let mut inputs = Vec::new();
    for t in 0..spec.t_max {
        for neuron in 0..spec.n_neurons {
            if rng.gen_bool(spec.input_rate) {
                inputs.push(Input { neuron, timestep: t, current });
            }
        }
    }

    Ok(Network {
        neurons,
        synapses,
        inputs,
        t_max: spec.t_max,
        max_delay: spec.max_delay,
        layers: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayeredSpec {
    pub layer_sizes: Vec<u32>,
    pub fanin: u32,
    pub t_max: u32,
    pub max_delay: u32,
    /// Poisson input probability for first-layer neurons.
    pub input_rate: f64,
    pub input_current: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub tau_m: f64,
    pub v_rst: f64,
    pub v_th: f64,
    pub seed: u64,
}

impl Default for LayeredSpec {
    fn default() -> Self {
        LayeredSpec {
            layer_sizes: vec![256, 128, 64, 10],
            fanin: 16,
            t_max: 100,
            max_delay: 1,
            input_rate: 0.2,
            input_current: 2.5,
            w_min: 0.0,
            w_max: 0.6,
            tau_m: 2.0,
            v_rst: 0.0,
            v_th: 1.0,
            seed: 0,
        }
    }
}

impl LayeredSpec {
    pub fn new(layer_sizes: Vec<u32>, fanin: u32, seed: u64) -> Self {
        LayeredSpec { layer_sizes, fanin, seed, ..Default::default() }
    }
}

/// Feed-forward network: every neuron outside the first layer draws `fanin`
/// distinct presynaptic neurons from the previous layer.
pub fn gen_layered(spec: &LayeredSpec) -> Result<Network, ModelError> {
    if spec.layer_sizes.len() < 2 {
        return Err(ModelError::Invalid("layered network needs at least two layers".into()));
    }
    if spec.layer_sizes.contains(&0) {
        return Err(ModelError::Invalid("layer sizes must be positive".into()));
    }
    if spec.max_delay == 0 {
        return Err(ModelError::Invalid("max_delay must be at least 1".into()));
    }
    for (i, pair) in spec.layer_sizes.windows(2).enumerate() {
        if spec.fanin > pair[0] {
            return Err(ModelError::Invalid(format!(
                "fanin {} exceeds size {} of layer {i}",
                spec.fanin, pair[0]
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let params = NeuronParams {
        tau_m: Fix::from_f64(spec.tau_m),
        v_rst: Fix::from_f64(spec.v_rst),
        g_l: Fix::ONE,
        v_th: Fix::from_f64(spec.v_th),
    };
    let total: u32 = spec.layer_sizes.iter().sum();
    let neurons = vec![Neuron { params, v0: params.v_rst }; total as usize];
    let (w_lo, w_hi) = (Fix::from_f64(spec.w_min), Fix::from_f64(spec.w_max));

    let mut synapses = Vec::new();
    let mut prev_start = 0u32;
    for pair in spec.layer_sizes.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let cur_start = prev_start + prev;
        for j in 0..cur {
            let mut srcs: Vec<usize> =
                index::sample(&mut rng, prev as usize, spec.fanin as usize).into_vec();
            srcs.sort_unstable();
            for s in srcs {
                synapses.push(Synapse {
                    src: prev_start + s as u32,
                    dst: cur_start + j,
                    weight: uniform_fix(&mut rng, w_lo, w_hi),
                    delay: rng.gen_range(1..=spec.max_delay),
                });
            }
        }
        prev_start = cur_start;
    }

    let current = Fix::from_f64(spec.input_current);
    let mut inputs = Vec::new();
    for t in 0..spec.t_max {
        for neuron in 0..spec.layer_sizes[0] {
            if rng.gen_bool(spec.input_rate) {
                inputs.push(Input { neuron, timestep: t, current });
            }
        }
    }

    let net = Network {
        neurons,
        synapses,
        inputs,
        t_max: spec.t_max,
        max_delay: spec.max_delay,
        layers: Some(spec.layer_sizes.clone()),
    };
    net.validate()?;
    Ok(net)
}

/// Workload with rotating per-core load spikes.
///
/// `burst_groups` source groups each fire all their neurons on every
/// `burst_groups`-th timestep (group `g` on timesteps `t % burst_groups == g`)
/// and are silent otherwise. Each burst neuron fans out to `fanout` random
/// neurons in the `sink_groups` sink groups, which never send spikes. Every
/// timestep exactly one source core is heavily loaded, while sink cores sit
/// off any dependency path. Each group is one layer, so layer-by-layer
/// partitioning onto `burst_groups + sink_groups` cores puts one group on
/// each core.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RotatingBurstSpec {
    pub burst_groups: u32,
    pub sink_groups: u32,
    pub group_size: u32,
    pub fanout: u32,
    pub t_max: u32,
    pub sink_weight: f64,
    pub seed: u64,
}

impl Default for RotatingBurstSpec {
    fn default() -> Self {
        RotatingBurstSpec {
            burst_groups: 8,
            sink_groups: 8,
            group_size: 16,
            fanout: 8,
            t_max: 100,
            sink_weight: 0.05,
            seed: 0,
        }
    }
}

impl RotatingBurstSpec {
    pub fn generate(&self) -> Result<Network, ModelError> {
        if self.burst_groups == 0 || self.sink_groups == 0 || self.group_size == 0 {
            return Err(ModelError::Invalid("burst workload needs non-empty groups".into()));
        }
        let n_sink = self.sink_groups * self.group_size;
        if self.fanout > n_sink {
            return Err(ModelError::Invalid("fanout exceeds sink population".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let burst = NeuronParams {
            tau_m: Fix::ONE,
            v_rst: Fix::ZERO,
            g_l: Fix::ONE,
            v_th: Fix::ONE,
        };
        let sink = NeuronParams { tau_m: Fix::from_int(4), ..burst };
        let n_burst = self.burst_groups * self.group_size;
        let mut neurons = vec![Neuron { params: burst, v0: Fix::ZERO }; n_burst as usize];
        neurons.extend(std::iter::repeat_n(Neuron { params: sink, v0: Fix::ZERO }, n_sink as usize));

        let w = Fix::from_f64(self.sink_weight);
        let mut synapses = Vec::new();
        for src in 0..n_burst {
            let mut dsts = index::sample(&mut rng, n_sink as usize, self.fanout as usize).into_vec();
            dsts.sort_unstable();
            for d in dsts {
                synapses.push(Synapse { src, dst: n_burst + d as u32, weight: w, delay: 1 });
            }
        }
        let mut inputs = Vec::new();
        for t in 0..self.t_max {
            let g = t % self.burst_groups;
            for k in 0..self.group_size {
                inputs.push(Input {
                    neuron: g * self.group_size + k,
                    timestep: t,
                    current: Fix::from_int(2),
                });
            }
        }
        let groups = (self.burst_groups + self.sink_groups) as usize;
        Ok(Network {
            neurons,
            synapses,
            inputs,
            t_max: self.t_max,
            max_delay: 1,
            layers: Some(vec![self.group_size; groups]),
        })
    }
}

/// Serializable description of a workload, used by config files and sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkloadSpec {
    Synthetic(SyntheticSpec),
    Layered(LayeredSpec),
    RotatingBurst(RotatingBurstSpec),
}

impl WorkloadSpec {
    pub fn generate(&self) -> Result<Network, ModelError> {
        match self {
            WorkloadSpec::Synthetic(s) => gen_synthetic(s),
            WorkloadSpec::Layered(s) => gen_layered(s),
            WorkloadSpec::RotatingBurst(s) => s.generate(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> WorkloadSpec {
        let mut out = self.clone();
        match &mut out {
            WorkloadSpec::Synthetic(s) => s.seed = seed,
            WorkloadSpec::Layered(s) => s.seed = seed,
            WorkloadSpec::RotatingBurst(s) => s.seed = seed,
        }
        out
    }

    /// Apply the firing-rate dial. Only synthetic workloads carry the knob;
    /// other kinds are returned unchanged.
    pub fn with_rate_level(&self, level: f64) -> WorkloadSpec {
        let mut out = self.clone();
        if let WorkloadSpec::Synthetic(s) = &mut out {
            s.rate = RateKnobs::level(level);
        }
        out
    }
}
