use serde::{Deserialize, Serialize};

use crate::metrics::{EnergyReport, OpCounts};
use crate::model::SpikeRaster;
use crate::neurocore::{BlockReason, CoreCounts, Mode, SegmentKind};
use crate::noc::{Coord, DepFlag, Grid, NocStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreReport {
    pub id: u32,
    pub coord: Coord,
    pub neurons: usize,
    pub busy: u64,
    pub wait: u64,
    pub rollback: u64,
    pub counts: CoreCounts,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    /// Spike-buffer writes outside the held window.
    pub buffer_violations: u64,
    /// Start events breaking a per-edge ordering bound.
    pub invariant_violations: u64,
    /// Largest timestep gap seen across any dependency edge.
    pub max_edge_skew: u64,
    /// Largest gap between the most and least advanced core.
    pub max_global_skew: u64,
    pub first_violation: Option<String>,
}

/// One timeline segment of one core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub cycle_start: u64,
    pub cycle_end: u64,
    pub core: u32,
    pub timestep: u32,
    pub kind: SegmentKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SchedKind {
    Started { t: u32 },
    Finished { t: u32 },
    Blocked { t: u32, reason: BlockReason },
    DepReceived { from: u32, flag: DepFlag, t: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedEvent {
    pub cycle: u64,
    pub core: u32,
    #[serde(flatten)]
    pub kind: SchedKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mode: Mode,
    pub grid: Grid,
    pub m: u32,
    pub period: u32,
    pub n_vc: u8,
    pub total_cycles: u64,
    pub cores: Vec<CoreReport>,
    pub raster: SpikeRaster,
    pub noc: NocStats,
    pub counts: OpCounts,
    pub activity: CoreCounts,
    pub energy: EnergyReport,
    pub safety: SafetyReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<SchedEvent>,
}

impl SimReport {
    pub fn busy_cycles(&self) -> u64 {
        self.cores.iter().map(|c| c.busy).sum()
    }

    pub fn wait_cycles(&self) -> u64 {
        self.cores.iter().map(|c| c.wait).sum()
    }

    pub fn rollback_cycles(&self) -> u64 {
        self.cores.iter().map(|c| c.rollback).sum()
    }

    /// Rollback cycles as a fraction of all core cycles.
    pub fn rollback_share(&self) -> f64 {
        let all = self.total_cycles * self.cores.len() as u64;
        if all == 0 {
            0.0
        } else {
            self.rollback_cycles() as f64 / all as f64
        }
    }

    /// Per-core busy + wait + rollback must equal the total.
    pub fn check_breakdown(&self) -> Result<(), String> {
        for c in &self.cores {
            let sum = c.busy + c.wait + c.rollback;
            if sum != self.total_cycles {
                return Err(format!("core {}: breakdown {sum} != total {}", c.id, self.total_cycles));
            }
        }
        Ok(())
    }
}
