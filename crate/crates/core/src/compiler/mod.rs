//! Turns a network into per-core tables: neuron partition, synapse tables,
//! the core dependency graph and a physical placement.

mod deps;
mod mapping;
mod partition;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CompileError;
use crate::model::Network;
use crate::noc::Grid;

pub use deps::{extract_deps, CoreDeps, DepGraph, DEP_LIMIT};
pub use mapping::{avg_dep_distance, hilbert_d2xy, map, map_hilbert, map_plain, MappingKind, Placement};
pub use partition::{
    assign, build_cores, exchange_with_core0, partition, Capacity, Fanout, InSynapse, LogicCore,
    PartitionStrategy,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompileOptions {
    pub grid: Grid,
    /// Defaults to one core per router.
    pub n_cores: Option<usize>,
    pub capacity: Capacity,
    pub partition: PartitionStrategy,
    pub mapping: MappingKind,
    pub dep_limit: usize,
    /// Fraction of core 0's neurons swapped out to other cores.
    pub cyclic_fraction: f64,
    pub seed: u64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            grid: Grid::default(),
            n_cores: None,
            capacity: Capacity::default(),
            partition: PartitionStrategy::Auto,
            mapping: MappingKind::Hilbert,
            dep_limit: DEP_LIMIT,
            cyclic_fraction: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub grid: Grid,
    pub cores: Vec<LogicCore>,
    pub dep_graph: DepGraph,
    pub placement: Placement,
}

impl Program {
    pub fn n_cores(&self) -> usize {
        self.cores.len()
    }

    pub fn n_neurons(&self) -> usize {
        self.cores.iter().map(|c| c.neuron_ids.len()).sum()
    }

    pub fn avg_dep_distance(&self) -> f64 {
        avg_dep_distance(&self.placement, &self.dep_graph)
    }

    /// Structural consistency: every neuron placed once, fan-out rows point
    /// at real synapse-table rows, and the dependency graph matches the
    /// fan-out.
    pub fn validate(&self) -> Result<(), CompileError> {
        let n = self.n_neurons();
        let mut seen = vec![false; n];
        for (i, c) in self.cores.iter().enumerate() {
            if c.id as usize != i || c.fanout.len() != c.neuron_ids.len() {
                return Err(CompileError::Invalid(format!("core {i}: malformed core table")));
            }
            for &nid in &c.neuron_ids {
                match seen.get_mut(nid as usize) {
                    Some(s) if !*s => *s = true,
                    _ => return Err(CompileError::Invalid(format!("neuron {nid} placed twice or unknown"))),
                }
            }
            for f in c.fanout.iter().flatten() {
                let target = self
                    .cores
                    .get(f.core as usize)
                    .and_then(|t| t.synapses.get(f.synapse as usize))
                    .ok_or_else(|| CompileError::Invalid(format!("core {i}: dangling fan-out")))?;
                if target.weight != f.weight || f.delay == 0 {
                    return Err(CompileError::Invalid(format!("core {i}: fan-out disagrees with synapse row")));
                }
            }
            for s in &c.synapses {
                if s.target as usize >= c.neuron_ids.len() {
                    return Err(CompileError::Invalid(format!("core {i}: synapse targets unknown neuron")));
                }
            }
        }
        if self.dep_graph.n_cores() != self.cores.len() || self.placement.coords.len() != self.cores.len() {
            return Err(CompileError::Invalid("table sizes disagree".into()));
        }
        if extract_deps(&self.cores, usize::MAX)? != self.dep_graph {
            return Err(CompileError::Invalid("dependency graph does not match fan-out".into()));
        }
        self.dep_graph.validate()?;
        self.placement.validate(self.grid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("program serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CompileError> {
        let p: Program = serde_json::from_str(s).map_err(|e| CompileError::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, CompileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CompileError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CompileError> {
        crate::io::write_atomic(path, self.to_json().as_bytes())
            .map_err(|e| CompileError::Io(format!("{}: {e}", path.display())))
    }
}

pub fn compile(net: &Network, opts: &CompileOptions) -> Result<Program, CompileError> {
    net.validate()?;
    let n_cores = opts.n_cores.unwrap_or(opts.grid.cells());
    if n_cores > opts.grid.cells() {
        return Err(CompileError::TooManyCores { cores: n_cores, cells: opts.grid.cells() });
    }
    let mut assignment = assign(net, n_cores, &opts.partition)?;
    if opts.cyclic_fraction > 0.0 {
        assignment = exchange_with_core0(&assignment, opts.cyclic_fraction, opts.seed);
    }
    let cores = build_cores(net, &assignment, n_cores, &opts.capacity)?;
    let dep_graph = extract_deps(&cores, opts.dep_limit)?;
    let placement = map(opts.mapping, n_cores, opts.grid)?;
    log::debug!(
        "compiled {} neurons onto {n_cores} cores, {} dependency edges, mean distance {:.2}",
        net.n_neurons(),
        dep_graph.n_edges(),
        avg_dep_distance(&placement, &dep_graph)
    );
    Ok(Program { grid: opts.grid, cores, dep_graph, placement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_layered, gen_synthetic, LayeredSpec, SyntheticSpec};

    #[test]
    fn json_round_trip_and_keys() {
        let net = gen_layered(&LayeredSpec::new(vec![16, 8, 4], 4, 2)).unwrap();
        let p = compile(&net, &CompileOptions { grid: Grid::new(2, 2), ..Default::default() }).unwrap();
        let text = p.to_json();
        for key in ["\"cores\"", "\"dep_graph\"", "\"placement\"", "\"grid\":\"2x2\""] {
            assert!(text.contains(key), "missing {key}");
        }
        assert_eq!(Program::from_json(&text).unwrap(), p);
    }

    #[test]
    fn feedforward_layers_compile_acyclic() {
        let net = gen_layered(&LayeredSpec::default()).unwrap();
        let p = compile(&net, &CompileOptions::default()).unwrap();
        assert!(p.dep_graph.is_acyclic());
        assert_eq!(p.n_neurons(), net.n_neurons());
    }

    #[test]
    fn cyclic_exchange_creates_cycles() {
        let net = gen_layered(&LayeredSpec::default()).unwrap();
        let opts = CompileOptions { cyclic_fraction: 0.25, ..Default::default() };
        let p = compile(&net, &opts).unwrap();
        assert!(!p.dep_graph.is_acyclic());
        assert!(!p.dep_graph.cores[0].pre_deps.is_empty());
    }

    #[test]
    fn too_many_cores_for_grid() {
        let net = gen_synthetic(&SyntheticSpec { n_neurons: 10, n_synapses: 10, ..Default::default() }).unwrap();
        let opts = CompileOptions { grid: Grid::new(2, 2), n_cores: Some(5), ..Default::default() };
        assert!(matches!(compile(&net, &opts), Err(CompileError::TooManyCores { .. })));
    }

    #[test]
    fn tampered_program_rejected() {
        let net = gen_layered(&LayeredSpec::new(vec![8, 4], 4, 0)).unwrap();
        let p = compile(&net, &CompileOptions { grid: Grid::new(2, 1), ..Default::default() }).unwrap();
        let mut bad = p.clone();
        bad.dep_graph.cores[0].post_deps.clear();
        assert!(bad.validate().is_err());
        let mut bad = p;
        bad.cores[0].fanout[0][0].synapse = 999;
        assert!(bad.validate().is_err());
    }
}
