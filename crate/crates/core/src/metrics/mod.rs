//! Operation-count energy model and report/trace output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{SimReport, TraceRow};

/// Energy per operation in abstract integer units. The defaults are not
/// derived from any silicon process; only ratios between runs are
/// meaningful. Synapse reads hit the large weight memory and cost about as
/// much as a neuron update, the dependency tables are the smallest memory
/// on the core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyCostTable {
    pub neuron_update: u64,
    pub synapse_acc: u64,
    pub buffer_read: u64,
    pub buffer_write: u64,
    pub scheduler_event: u64,
    pub noc_hop: u64,
    pub static_per_core_cycle: u64,
}

impl Default for EnergyCostTable {
    fn default() -> Self {
        EnergyCostTable {
            neuron_update: 20,
            synapse_acc: 16,
            buffer_read: 4,
            buffer_write: 4,
            scheduler_event: 2,
            noc_hop: 4,
            static_per_core_cycle: 2,
        }
    }
}

/// Operation counts the energy model charges for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub neuron_updates: u64,
    pub synapse_acc: u64,
    pub buffer_reads: u64,
    pub buffer_writes: u64,
    pub scheduler_events: u64,
    /// Router traversals: link hops plus the final ejection stage.
    pub noc_hops: u64,
    /// Share of `noc_hops` taken by dependency packets.
    pub dep_hops: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub neuron_update: u64,
    pub synapse_acc: u64,
    pub buffer_read: u64,
    pub buffer_write: u64,
    pub scheduler_event: u64,
    pub noc_hop: u64,
    #[serde(rename = "static")]
    pub static_energy: u64,
    pub total: u64,
}

impl EnergyReport {
    /// Energy spent only because of dependency tracking: scheduler events
    /// and the hops of dependency packets, as a fraction of the total.
    pub fn overhead_share(&self, counts: &OpCounts, costs: &EnergyCostTable) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        (self.scheduler_event + counts.dep_hops * costs.noc_hop) as f64 / self.total as f64
    }
}

pub fn energy_total(counts: &OpCounts, costs: &EnergyCostTable, n_cores: u64, cycles: u64) -> EnergyReport {
    let mut e = EnergyReport {
        neuron_update: counts.neuron_updates * costs.neuron_update,
        synapse_acc: counts.synapse_acc * costs.synapse_acc,
        buffer_read: counts.buffer_reads * costs.buffer_read,
        buffer_write: counts.buffer_writes * costs.buffer_write,
        scheduler_event: counts.scheduler_events * costs.scheduler_event,
        noc_hop: counts.noc_hops * costs.noc_hop,
        static_energy: costs.static_per_core_cycle * n_cores * cycles,
        total: 0,
    };
    e.total = e.neuron_update
        + e.synapse_acc
        + e.buffer_read
        + e.buffer_write
        + e.scheduler_event
        + e.noc_hop
        + e.static_energy;
    e
}

/// Write the report as JSON.
pub fn export_report(r: &SimReport, path: &Path) -> std::io::Result<()> {
    r.check_breakdown().map_err(std::io::Error::other)?;
    let text = serde_json::to_string_pretty(r).map_err(std::io::Error::other)?;
    crate::io::write_atomic(path, text.as_bytes())
}

pub fn import_report(path: &Path) -> std::io::Result<SimReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}

/// Write timeline rows as CSV.
pub fn export_trace(rows: &[TraceRow], path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    if rows.is_empty() {
        w.write_record(["cycle_start", "cycle_end", "core", "timestep", "kind"])
            .map_err(std::io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    crate::io::write_atomic(path, &bytes)
}

pub fn import_trace(path: &Path) -> std::io::Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).map_err(std::io::Error::other)?;
    r.deserialize().map(|row| row.map_err(std::io::Error::other)).collect()
}
