//! Global cycle loop: routers and cores advance one cycle at a time under
//! one of the three coordination protocols.

mod barrier;
mod config;
mod report;

use crate::compiler::{compile, Program};
use crate::error::SimError;
use crate::metrics::{energy_total, OpCounts};
use crate::model::{Network, Spike, SpikeRaster};
use crate::neurocore::{BlockReason, Busy, CoreCounts, Mode, NeuroCore, SegmentKind};
use crate::noc::{Body, Mesh, PacketClass};

pub use barrier::{BarrierKind, BarrierTree};
pub use config::SimConfig;
pub use report::{CoreReport, SafetyReport, SchedEvent, SchedKind, SimReport, TraceRow};

/// Compile `net` with the options in `cfg` and simulate it.
pub fn compile_and_run(net: &Network, cfg: &SimConfig) -> Result<SimReport, SimError> {
    let net = truncate(net, cfg);
    let program = compile(&net, &cfg.compile_options())?;
    run(&net, &program, cfg)
}

fn truncate(net: &Network, cfg: &SimConfig) -> Network {
    match cfg.t_max {
        Some(t) if t < net.t_max => net.truncated(t),
        _ => net.clone(),
    }
}

/// Zero in-flight spikes. The simulator sees every router, so the barrier
/// needs no drain messages.
pub fn drain_detect(mesh: &Mesh) -> bool {
    mesh.in_flight(PacketClass::Spike) == 0
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    cores: Vec<NeuroCore>,
    mesh: Mesh,
    /// Core at each router, by grid index.
    core_at: Vec<Option<u32>>,
    segments: Vec<Vec<Busy>>,
    schedule: Vec<SchedEvent>,
    safety: SafetyReport,
    /// Cores whose advance condition must be re-evaluated.
    dirty: Vec<bool>,
    last_block: Vec<Option<(u32, BlockReason)>>,
    started: Vec<u32>,
    tree: BarrierTree,
    /// Core reached the current barrier.
    arrived: Vec<bool>,
    /// Barrier messages received from children in the current round.
    child_syncs: Vec<usize>,
    sent_up: Vec<bool>,
    /// Sync: latest timestep each core has been released into.
    released: Vec<u32>,
    /// Speculative: first timestep past each core's current period.
    epoch_end: Vec<u32>,
    t_max: u32,
}

impl Sim<'_> {
    fn fault(&self, core: u32, detail: String) -> SimError {
        SimError::ProtocolFault { core, detail }
    }

    fn log(&mut self, cycle: u64, core: u32, kind: SchedKind) {
        if self.cfg.trace_scheduler {
            self.schedule.push(SchedEvent { cycle, core, kind });
        }
    }

    fn deliver(&mut self, now: u64, ejected: &mut Vec<crate::noc::Packet>) -> Result<(), SimError> {
        self.mesh.step(now, ejected);
        for p in ejected.drain(..) {
            let grid = self.mesh.grid();
            let dst = self.core_at[grid.index(p.header.dst)]
                .ok_or_else(|| SimError::Config(format!("packet for empty router {}", p.header.dst)))?;
            self.cores[dst as usize].receive(&p).map_err(|d| SimError::ProtocolFault { core: dst, detail: d })?;
            let from = self.core_at[grid.index(p.header.src)].unwrap_or(u32::MAX);
            match p.body {
                Body::Dep(d) => {
                    self.dirty[dst as usize] = true;
                    self.log(now, dst, SchedKind::DepReceived { from, flag: d.flag, t: d.timestep });
                }
                Body::Sync { .. } if self.tree.parent[dst as usize] == Some(from) => self.release(dst as usize, now)?,
                Body::Sync { .. } => self.child_syncs[dst as usize] += 1,
                Body::Spike(_) => {}
            }
        }
        Ok(())
    }

    fn flush(&mut self, c: usize, now: u64) -> Result<(), SimError> {
        while let Some(p) = self.cores[c].pop_due(now) {
            self.mesh.inject(self.cores[c].coord, p, now)?;
        }
        Ok(())
    }

    fn complete(&mut self, now: u64) -> Result<(), SimError> {
        for c in 0..self.cores.len() {
            self.flush(c, now)?;
            let Some(b) = self.cores[c].complete(now) else { continue };
            self.segments[c].push(b);
            if b.kind == SegmentKind::Compute {
                self.log(now, c as u32, SchedKind::Finished { t: b.t });
                if self.cfg.mode == Mode::DepAsync {
                    self.cores[c].emit_finish(b.t, now);
                    self.flush(c, now)?;
                }
            }
            self.dirty[c] = true;
        }
        Ok(())
    }

    fn start(&mut self, c: usize, t: u32, now: u64) -> Result<(), SimError> {
        self.cores[c].start(t, now);
        if self.cfg.mode == Mode::DepAsync {
            self.cores[c].emit_start(t, now);
        }
        self.flush(c, now)?;
        self.started.push(c as u32);
        self.last_block[c] = None;
        self.log(now, c as u32, SchedKind::Started { t });
        Ok(())
    }

    fn starts_depasync(&mut self, now: u64) -> Result<(), SimError> {
        for c in 0..self.cores.len() {
            if !self.dirty[c] || !self.cores[c].is_idle() {
                continue;
            }
            self.dirty[c] = false;
            let Some(t) = self.cores[c].next_timestep() else { continue };
            self.cores[c].counts.scheduler_events += 1;
            match self.cores[c].tables.blocking_reason(self.cores[c].t_cur(), self.cfg.m) {
                None => self.start(c, t, now)?,
                Some(reason) => {
                    if self.last_block[c] != Some((t, reason)) {
                        self.last_block[c] = Some((t, reason));
                        self.log(now, c as u32, SchedKind::Blocked { t, reason });
                    }
                }
            }
        }
        Ok(())
    }

    fn quiet(&self) -> bool {
        self.mesh.is_empty() && self.cores.iter().all(|c| c.is_idle() && !c.has_pending())
    }

    /// Nothing left that a barrier release could race with.
    fn barrier_quiet(&self) -> bool {
        drain_detect(&self.mesh)
            && self.cores.iter().all(|c| c.is_idle() && !c.has_pending_spikes() && !c.rollback_pending())
    }

    /// Open the next barrier round at core `c` and pass the release on.
    fn release(&mut self, c: usize, now: u64) -> Result<(), SimError> {
        self.arrived[c] = false;
        self.child_syncs[c] = 0;
        self.sent_up[c] = false;
        let t = match self.cfg.mode {
            Mode::Se => {
                let end = self.epoch_end[c];
                self.cores[c].prune_before(end);
                self.epoch_end[c] = (end + self.cfg.period()).min(self.t_max);
                end
            }
            _ => {
                self.released[c] += 1;
                self.released[c]
            }
        };
        if self.cfg.barrier == BarrierKind::Tree {
            for i in 0..self.tree.children[c].len() {
                let child = self.tree.children[c][i];
                self.cores[c].send_sync(child, t, now);
            }
        }
        self.flush(c, now)
    }

    /// Forward completed subtrees towards the root; release at the root.
    fn progress_barrier(&mut self, now: u64) -> Result<(), SimError> {
        for c in 0..self.cores.len() {
            if !self.arrived[c] || self.sent_up[c] || self.child_syncs[c] < self.tree.children[c].len() {
                continue;
            }
            match self.tree.parent[c] {
                Some(p) => {
                    let t = self.cores[c].next_timestep().unwrap_or(self.t_max);
                    self.cores[c].send_sync(p, t, now);
                    self.flush(c, now)?;
                    self.sent_up[c] = true;
                }
                None if self.barrier_quiet() => self.release(c, now)?,
                None => {}
            }
        }
        Ok(())
    }

    fn starts_sync(&mut self, now: u64) -> Result<(), SimError> {
        if self.cfg.barrier == BarrierKind::Ideal {
            if !drain_detect(&self.mesh) || !self.quiet() {
                return Ok(());
            }
            let Some(t) = self.cores.first().and_then(|c| c.next_timestep()) else {
                return Ok(());
            };
            for c in 0..self.cores.len() {
                self.start(c, t, now)?;
            }
            return Ok(());
        }
        for c in 0..self.cores.len() {
            match self.cores[c].next_timestep() {
                Some(t) if self.cores[c].is_idle() && t > self.released[c] => self.arrived[c] = true,
                _ => {}
            }
        }
        self.progress_barrier(now)?;
        for c in 0..self.cores.len() {
            match self.cores[c].next_timestep() {
                Some(t) if self.cores[c].is_idle() && t <= self.released[c] => self.start(c, t, now)?,
                _ => {}
            }
        }
        Ok(())
    }

    fn starts_se(&mut self, now: u64) -> Result<(), SimError> {
        let at_barrier = |c: &NeuroCore, end: u32| {
            c.is_idle() && !c.rollback_pending() && c.t_cur() + 1 >= i64::from(end) && end < self.t_max
        };
        match self.cfg.barrier {
            BarrierKind::Ideal => {
                let all = self.quiet() && self.cores.iter().zip(&self.epoch_end).all(|(c, &e)| at_barrier(c, e));
                if all {
                    for c in 0..self.cores.len() {
                        self.release(c, now)?;
                    }
                }
            }
            BarrierKind::Tree => {
                for c in 0..self.cores.len() {
                    if at_barrier(&self.cores[c], self.epoch_end[c]) {
                        self.arrived[c] = true;
                    }
                }
                self.progress_barrier(now)?;
            }
        }
        for c in 0..self.cores.len() {
            if !self.cores[c].is_idle() {
                continue;
            }
            if self.cores[c].rollback_pending() {
                self.cores[c].start_rollback(now).map_err(|d| self.fault(c as u32, d))?;
                self.flush(c, now)?;
                continue;
            }
            match self.cores[c].next_timestep() {
                Some(t) if t < self.epoch_end[c] => self.start(c, t, now)?,
                _ => {}
            }
        }
        Ok(())
    }

    fn violation(&mut self, msg: String) {
        self.safety.invariant_violations += 1;
        if self.safety.first_violation.is_none() {
            self.safety.first_violation = Some(msg);
        }
    }

    /// Check the ordering bounds for every core that started this cycle.
    fn check_invariants(&mut self, now: u64) {
        let m = i64::from(self.cfg.m);
        let started = std::mem::take(&mut self.started);
        for &b in &started {
            let core = &self.cores[b as usize];
            let t_b = core.last_started();
            let mut msgs = Vec::new();
            let mut skew = 0u64;
            if self.cfg.mode == Mode::DepAsync {
                for &a in &core.deps().pre_deps {
                    let f_a = self.cores[a as usize].t_cur();
                    if t_b > f_a + 1 {
                        msgs.push(format!("cycle {now}: core {b} started {t_b} before core {a} finished {}", t_b - 1));
                    }
                }
                for &p in &core.deps().post_deps {
                    let s_p = self.cores[p as usize].last_started();
                    if t_b > s_p + m - 1 {
                        msgs.push(format!("cycle {now}: core {b} started {t_b}, {m}-window past core {p} at {s_p}"));
                    }
                }
            }
            for &n in core.deps().pre_deps.iter().chain(&core.deps().post_deps) {
                skew = skew.max(t_b.abs_diff(self.cores[n as usize].last_started()));
            }
            self.safety.max_edge_skew = self.safety.max_edge_skew.max(skew);
            for msg in msgs {
                self.violation(msg);
            }
        }
        if !started.is_empty() {
            let (lo, hi) = self.cores.iter().fold((i64::MAX, i64::MIN), |(lo, hi), c| {
                (lo.min(c.last_started()), hi.max(c.last_started()))
            });
            if lo <= hi {
                self.safety.max_global_skew = self.safety.max_global_skew.max(hi.abs_diff(lo));
            }
        }
        self.started = started;
        self.started.clear();
    }

    fn next_event(&self, now: u64) -> Option<u64> {
        let mut next: Option<u64> = None;
        let mut consider = |c: u64| next = Some(next.map_or(c, |n: u64| n.min(c)));
        if let Some(r) = self.mesh.next_ready() {
            consider(r);
        }
        for c in &self.cores {
            if let Some(i) = c.next_injection() {
                consider(i);
            }
            if let Some(b) = c.busy() {
                consider(b.end);
            }
        }
        next.map(|n| n.max(now + 1))
    }

    fn deadlock_detail(&self) -> String {
        let stuck: Vec<String> = self
            .cores
            .iter()
            .filter(|c| !c.is_done())
            .take(8)
            .map(|c| {
                let why = match c.tables.blocking_reason(c.t_cur(), self.cfg.m) {
                    Some(BlockReason::Pre) => "pre",
                    Some(BlockReason::Post) => "post",
                    None => "barrier",
                };
                format!("core {} at {} blocked by {why}", c.id, c.t_cur())
            })
            .collect();
        stuck.join("; ")
    }
}

/// Simulate `program` (compiled from `net`) under `cfg`.
pub fn run(net: &Network, program: &Program, cfg: &SimConfig) -> Result<SimReport, SimError> {
    cfg.validate()?;
    program.validate()?;
    let net = truncate(net, cfg);
    if program.grid != cfg.grid {
        return Err(SimError::Config(format!("program compiled for {}, config grid {}", program.grid, cfg.grid)));
    }
    if program.n_neurons() != net.n_neurons() {
        return Err(SimError::Config("program and workload disagree on neuron count".into()));
    }
    // With a one-timestep window every core on a cycle waits for a START
    // that its neighbour can only send after the wait itself ends.
    if cfg.mode == Mode::DepAsync && cfg.m == 1 && !program.dep_graph.is_acyclic() {
        return Err(SimError::Config("m = 1 requires an acyclic dependency graph in depasync mode".into()));
    }
    let coords = &program.placement.coords;
    let mut core_at = vec![None; cfg.grid.cells()];
    for (i, &c) in coords.iter().enumerate() {
        core_at[cfg.grid.index(c)] = Some(i as u32);
    }
    let cores: Vec<NeuroCore> = program
        .cores
        .iter()
        .map(|c| {
            NeuroCore::new(
                c,
                &program.dep_graph.cores[c.id as usize],
                &net,
                coords,
                cfg.mode,
                cfg.m,
                cfg.n_vc,
                cfg.costs(),
            )
        })
        .collect();
    let n = cores.len();
    let mut sim = Sim {
        cfg,
        cores,
        mesh: Mesh::new(cfg.grid, cfg.noc()),
        core_at,
        segments: vec![Vec::new(); n],
        schedule: Vec::new(),
        safety: SafetyReport::default(),
        dirty: vec![true; n],
        last_block: vec![None; n],
        started: Vec::new(),
        tree: BarrierTree::new(cfg.grid, coords),
        arrived: vec![false; n],
        child_syncs: vec![0; n],
        sent_up: vec![false; n],
        released: vec![0; n],
        epoch_end: vec![cfg.period().min(net.t_max); n],
        t_max: net.t_max,
    };
    let mut ejected = Vec::new();
    let mut now = 0u64;
    loop {
        sim.deliver(now, &mut ejected)?;
        sim.complete(now)?;
        match cfg.mode {
            Mode::Sync => sim.starts_sync(now)?,
            Mode::Se => sim.starts_se(now)?,
            Mode::DepAsync => sim.starts_depasync(now)?,
        }
        sim.check_invariants(now);
        if sim.cores.iter().all(NeuroCore::is_done) && sim.mesh.is_empty() {
            break;
        }
        let Some(next) = sim.next_event(now) else {
            return Err(SimError::Deadlock { cycle: now, detail: sim.deadlock_detail() });
        };
        if next > cfg.max_cycles {
            return Err(SimError::CycleLimit(cfg.max_cycles));
        }
        sim.mesh.skip(next - now - 1);
        now = next;
    }
    Ok(build_report(sim, now, &net))
}

fn build_report(sim: Sim<'_>, total: u64, net: &Network) -> SimReport {
    let cfg = sim.cfg;
    let mut spikes = Vec::new();
    let mut activity = CoreCounts::default();
    let mut cores = Vec::with_capacity(sim.cores.len());
    let mut trace = Vec::new();
    let mut buffer_violations = 0;
    for (c, segs) in sim.cores.iter().zip(&sim.segments) {
        for t in 0..net.t_max {
            spikes.extend(c.fired_at(t).map(|neuron| Spike { t, neuron }));
        }
        activity.add(&c.counts);
        buffer_violations += c.buffer_violations();
        let busy: u64 = segs.iter().filter(|s| s.kind == SegmentKind::Compute).map(|s| s.end - s.start).sum();
        let rollback: u64 = segs.iter().filter(|s| s.kind == SegmentKind::Rollback).map(|s| s.end - s.start).sum();
        if cfg.trace {
            let mut at = 0;
            for s in segs {
                if s.start > at {
                    trace.push(TraceRow { cycle_start: at, cycle_end: s.start, core: c.id, timestep: s.t, kind: SegmentKind::Wait });
                }
                trace.push(TraceRow { cycle_start: s.start, cycle_end: s.end, core: c.id, timestep: s.t, kind: s.kind });
                at = s.end;
            }
            if at < total {
                let t = segs.last().map_or(0, |s| s.t);
                trace.push(TraceRow { cycle_start: at, cycle_end: total, core: c.id, timestep: t, kind: SegmentKind::Wait });
            }
        }
        cores.push(CoreReport {
            id: c.id,
            coord: c.coord,
            neurons: c.n_local(),
            busy,
            wait: total - busy - rollback,
            rollback,
            counts: c.counts,
        });
    }
    let noc = sim.mesh.into_stats();
    let counts = OpCounts {
        neuron_updates: activity.neuron_updates,
        synapse_acc: activity.synapse_acc,
        buffer_reads: activity.buffer_reads,
        buffer_writes: activity.buffer_writes,
        scheduler_events: activity.scheduler_events,
        noc_hops: noc.hops.total() + noc.ejected.total(),
        dep_hops: noc.hops.dep + noc.ejected.dep,
    };
    let energy = energy_total(&counts, &cfg.energy, cores.len() as u64, total);
    SimReport {
        mode: cfg.mode,
        grid: cfg.grid,
        m: cfg.m,
        period: cfg.period(),
        n_vc: cfg.n_vc,
        total_cycles: total,
        cores,
        raster: SpikeRaster::from_spikes(spikes),
        noc,
        counts,
        activity,
        energy,
        safety: SafetyReport { buffer_violations, ..sim.safety },
        trace,
        schedule: sim.schedule,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::Fix;
    use crate::model::{gen_synthetic, reference_run, Neuron, NeuronParams, SyntheticSpec};
    use crate::noc::Grid;

    fn quiet_net(n: usize, t_max: u32) -> Network {
        let mut net = Network::empty(t_max, 1);
        net.neurons = vec![
            Neuron {
                params: NeuronParams { tau_m: Fix::from_int(2), v_rst: Fix::ZERO, g_l: Fix::ONE, v_th: Fix::ONE },
                v0: Fix::ZERO,
            };
            n
        ];
        net
    }

    #[test]
    fn single_idle_core_cost_is_exact() {
        let net = quiet_net(5, 10);
        for mode in Mode::ALL {
            let cfg = SimConfig { grid: Grid::new(1, 1), mode, ..Default::default() };
            let r = compile_and_run(&net, &cfg).unwrap();
            assert_eq!(r.total_cycles, 10 * (cfg.c_sched + cfg.c_update * 5), "{mode}");
            assert!(r.raster.is_empty());
            r.check_breakdown().unwrap();
        }
    }

    #[test]
    fn zero_timesteps() {
        let net = quiet_net(3, 0);
        let r = compile_and_run(&net, &SimConfig { grid: Grid::new(1, 1), ..Default::default() }).unwrap();
        assert_eq!(r.total_cycles, 0);
    }

    #[test]
    fn small_synthetic_matches_reference_in_every_mode() {
        let spec = SyntheticSpec { n_neurons: 120, n_synapses: 2000, t_max: 30, seed: 3, ..Default::default() };
        let net = gen_synthetic(&spec).unwrap();
        let want = reference_run(&net).unwrap();
        assert!(!want.is_empty());
        for mode in Mode::ALL {
            let cfg = SimConfig { grid: Grid::new(2, 2), mode, ..Default::default() };
            let r = compile_and_run(&net, &cfg).unwrap();
            assert_eq!(r.raster.first_divergence(&want), None, "{mode}");
            assert_eq!(r.safety.invariant_violations, 0, "{:?}", r.safety.first_violation);
            assert_eq!(r.safety.buffer_violations, 0);
            r.check_breakdown().unwrap();
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let net = quiet_net(4, 2);
        let p = compile(&net, &SimConfig::default().compile_options()).unwrap();
        let cfg = SimConfig { grid: Grid::new(2, 2), ..Default::default() };
        assert!(matches!(run(&net, &p, &cfg), Err(SimError::Config(_))));
    }
}
