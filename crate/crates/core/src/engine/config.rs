use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BarrierKind;
use crate::compiler::{Capacity, CompileOptions, MappingKind, PartitionStrategy, DEP_LIMIT};
use crate::error::SimError;
use crate::metrics::EnergyCostTable;
use crate::neurocore::{CoreCosts, Mode};
use crate::noc::{Grid, NocConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub grid: Grid,
    pub mode: Mode,
    /// Spike-buffer window in timesteps.
    pub m: u32,
    /// Speculative-execution barrier period; defaults to `m`.
    pub period: Option<u32>,
    pub barrier: BarrierKind,
    pub n_vc: u8,
    pub vc_depth: usize,
    pub cycles_per_hop: u32,
    pub c_update: u64,
    pub c_spike: u64,
    pub c_sched: u64,
    pub inter_cluster_slowdown: u32,
    pub cluster_size: Option<Grid>,
    pub seed: u64,
    /// Run only the first `t_max` timesteps of the workload.
    pub t_max: Option<u32>,
    pub mapping: MappingKind,
    pub partition: PartitionStrategy,
    pub cyclic_fraction: f64,
    pub capacity: Capacity,
    pub max_cycles: u64,
    /// Keep per-segment timeline rows in the report.
    pub trace: bool,
    /// Keep scheduler events (starts, finishes, blocks, dependency packets).
    pub trace_scheduler: bool,
    pub energy: EnergyCostTable,
}

impl Default for SimConfig {
    fn default() -> Self {
        let costs = CoreCosts::default();
        let noc = NocConfig::default();
        SimConfig {
            grid: Grid::new(4, 4),
            mode: Mode::DepAsync,
            m: 4,
            period: None,
            barrier: BarrierKind::Tree,
            n_vc: noc.n_vc,
            vc_depth: noc.vc_depth,
            cycles_per_hop: noc.cycles_per_hop,
            c_update: costs.c_update,
            c_spike: costs.c_spike,
            c_sched: costs.c_sched,
            inter_cluster_slowdown: noc.inter_cluster_slowdown,
            cluster_size: noc.cluster_size,
            seed: 0,
            t_max: None,
            mapping: MappingKind::Hilbert,
            partition: PartitionStrategy::Auto,
            cyclic_fraction: 0.0,
            capacity: Capacity::default(),
            max_cycles: 1 << 40,
            trace: false,
            trace_scheduler: false,
            energy: EnergyCostTable::default(),
        }
    }
}

impl SimConfig {
    pub fn period(&self) -> u32 {
        self.period.unwrap_or(self.m)
    }

    pub fn costs(&self) -> CoreCosts {
        CoreCosts { c_update: self.c_update, c_spike: self.c_spike, c_sched: self.c_sched }
    }

    pub fn noc(&self) -> NocConfig {
        NocConfig {
            n_vc: self.n_vc,
            vc_depth: self.vc_depth,
            cycles_per_hop: self.cycles_per_hop,
            cluster_size: self.cluster_size,
            inter_cluster_slowdown: self.inter_cluster_slowdown,
        }
    }

    pub fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            grid: self.grid,
            n_cores: None,
            capacity: self.capacity,
            partition: self.partition.clone(),
            mapping: self.mapping,
            dep_limit: DEP_LIMIT,
            cyclic_fraction: self.cyclic_fraction,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::Config(msg.to_string()));
        if self.m == 0 {
            return bad("m must be at least 1");
        }
        if self.period == Some(0) {
            return bad("period must be at least 1");
        }
        if self.n_vc == 0 {
            return bad("n_vc must be at least 1");
        }
        if self.vc_depth == 0 {
            return bad("vc_depth must be at least 1");
        }
        if self.cycles_per_hop == 0 {
            return bad("cycles_per_hop must be at least 1");
        }
        if self.inter_cluster_slowdown == 0 {
            return bad("inter_cluster_slowdown must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.cyclic_fraction) {
            return bad("cyclic_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_hardware() {
        let c = SimConfig::default();
        assert_eq!((c.n_vc, c.cycles_per_hop, c.m, c.period()), (4, 2, 4, 4));
        assert_eq!(c.grid, Grid::new(4, 4));
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = SimConfig { mode: Mode::Se, m: 8, cluster_size: Some(Grid::new(2, 2)), ..Default::default() };
        assert_eq!(SimConfig::from_toml(&c.to_toml()).unwrap(), c);
        let c = SimConfig::from_toml("mode = \"sync\"\ngrid = \"8x8\"\n[energy]\nnoc_hop = 9\n").unwrap();
        assert_eq!(c.mode, Mode::Sync);
        assert_eq!(c.grid, Grid::new(8, 8));
        assert_eq!(c.energy.noc_hop, 9);
        assert_eq!(c.energy.neuron_update, EnergyCostTable::default().neuron_update);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SimConfig::from_toml("m = 0").is_err());
        assert!(SimConfig::from_toml("n_vc = 0").is_err());
        assert!(SimConfig::from_toml("bogus = 1").is_err());
        assert!(SimConfig::from_toml("mode = \"fast\"").is_err());
    }
}
