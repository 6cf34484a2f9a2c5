//! One neuromorphic core: its neuron slice, spike storage, dependency
//! tables and the bookkeeping each forwarding controller needs.

mod buffer;
mod tables;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compiler::{CoreDeps, Fanout, InSynapse, LogicCore};
use crate::fixed::Fix;
use crate::model::{lif_step, Network, NeuronParams, NeuronState};
use crate::noc::{Body, Coord, DepBody, DepFlag, Packet, PacketClass, SpikeBody};

pub use buffer::CircularSpikeBuffer;
pub use tables::{BlockReason, DependencyTables};

/// Timestep coordination protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Global barrier after every timestep.
    Sync,
    /// Speculative execution with rollback, global barrier every period.
    Se,
    /// Dependency-driven asynchronous forwarding.
    DepAsync,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Sync, Mode::Se, Mode::DepAsync];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sync => "sync",
            Mode::Se => "se",
            Mode::DepAsync => "depasync",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sync" => Ok(Mode::Sync),
            "se" => Ok(Mode::Se),
            "depasync" => Ok(Mode::DepAsync),
            _ => Err(format!("unknown mode {s:?} (sync|se|depasync)")),
        }
    }
}

/// Cycle cost of one timestep: `c_sched + c_update * neurons + c_spike *
/// spike packets`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoreCosts {
    pub c_update: u64,
    pub c_spike: u64,
    pub c_sched: u64,
}

impl Default for CoreCosts {
    fn default() -> Self {
        CoreCosts { c_update: 2, c_spike: 1, c_sched: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Compute,
    Wait,
    Rollback,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Busy {
    pub t: u32,
    pub start: u64,
    pub end: u64,
    pub kind: SegmentKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreCounts {
    /// Every LIF update, recomputation included.
    pub neuron_updates: u64,
    /// LIF updates redone by rollbacks.
    pub rollback_updates: u64,
    pub rollbacks: u64,
    pub late_spikes: u64,
    pub synapse_acc: u64,
    pub buffer_reads: u64,
    pub buffer_writes: u64,
    pub scheduler_events: u64,
    pub spikes_sent: u64,
    pub retractions_sent: u64,
    pub dep_sent: u64,
    pub sync_sent: u64,
}

impl CoreCounts {
    pub fn add(&mut self, o: &CoreCounts) {
        self.neuron_updates += o.neuron_updates;
        self.rollback_updates += o.rollback_updates;
        self.rollbacks += o.rollbacks;
        self.late_spikes += o.late_spikes;
        self.synapse_acc += o.synapse_acc;
        self.buffer_reads += o.buffer_reads;
        self.buffer_writes += o.buffer_writes;
        self.scheduler_events += o.scheduler_events;
        self.spikes_sent += o.spikes_sent;
        self.retractions_sent += o.retractions_sent;
        self.dep_sent += o.dep_sent;
        self.sync_sent += o.sync_sent;
    }
}

/// Speculative-execution state for the current period.
#[derive(Clone, Debug, Default)]
struct Speculation {
    /// Received input by consuming timestep. Kept for replay.
    log: BTreeMap<u32, Vec<i64>>,
    /// Membrane potentials at entry of each timestep.
    checkpoints: BTreeMap<u32, Vec<Fix>>,
    rollback_to: Option<u32>,
}

#[derive(Clone, Debug)]
enum Storage {
    Ring(CircularSpikeBuffer),
    Log(Speculation),
}

#[derive(Clone, Debug)]
pub struct NeuroCore {
    pub id: u32,
    pub coord: Coord,
    neuron_ids: Vec<u32>,
    params: Vec<NeuronParams>,
    v: Vec<Fix>,
    fanout: Vec<Vec<Fanout>>,
    synapses: Vec<InSynapse>,
    /// External current by timestep: (local neuron, raw value).
    inputs: Vec<Vec<(u32, i64)>>,
    /// Router of every core, by core id.
    coords: Vec<Coord>,
    deps: CoreDeps,
    pub tables: DependencyTables,
    storage: Storage,
    n_vc: u8,
    t_max: u32,
    costs: CoreCosts,
    t_cur: i64,
    last_started: i64,
    busy: Option<Busy>,
    pending: VecDeque<(u64, Packet)>,
    /// Fired local neurons per timestep, ascending.
    fired: Vec<Vec<u32>>,
    pub counts: CoreCounts,
    acc: Vec<i64>,
}

impl NeuroCore {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        core: &LogicCore,
        deps: &CoreDeps,
        net: &Network,
        coords: &[Coord],
        mode: Mode,
        m: u32,
        n_vc: u8,
        costs: CoreCosts,
    ) -> Self {
        let n_local = core.neuron_ids.len();
        let mut local_of = std::collections::HashMap::with_capacity(n_local);
        for (l, &g) in core.neuron_ids.iter().enumerate() {
            local_of.insert(g, l as u32);
        }
        let mut inputs = vec![Vec::new(); net.t_max as usize];
        for inp in &net.inputs {
            if let Some(&l) = local_of.get(&inp.neuron) {
                inputs[inp.timestep as usize].push((l, i64::from(inp.current.raw())));
            }
        }
        let storage = match mode {
            Mode::Se => Storage::Log(Speculation::default()),
            Mode::Sync | Mode::DepAsync => Storage::Ring(CircularSpikeBuffer::new(
                CircularSpikeBuffer::slot_count(net.max_delay, m),
                n_local,
            )),
        };
        NeuroCore {
            id: core.id,
            coord: coords[core.id as usize],
            neuron_ids: core.neuron_ids.clone(),
            params: core.neuron_ids.iter().map(|&g| net.neurons[g as usize].params).collect(),
            v: core.neuron_ids.iter().map(|&g| net.neurons[g as usize].v0).collect(),
            fanout: core.fanout.clone(),
            synapses: core.synapses.clone(),
            inputs,
            coords: coords.to_vec(),
            tables: DependencyTables::new(deps.pre_deps.len(), deps.post_deps.len()),
            deps: deps.clone(),
            storage,
            n_vc,
            t_max: net.t_max,
            costs,
            t_cur: -1,
            last_started: -1,
            busy: None,
            pending: VecDeque::new(),
            fired: vec![Vec::new(); net.t_max as usize],
            counts: CoreCounts::default(),
            acc: Vec::with_capacity(n_local),
        }
    }

    pub fn n_local(&self) -> usize {
        self.neuron_ids.len()
    }

    pub fn deps(&self) -> &CoreDeps {
        &self.deps
    }

    /// Last completed timestep, -1 before the first.
    pub fn t_cur(&self) -> i64 {
        self.t_cur
    }

    pub fn last_started(&self) -> i64 {
        self.last_started
    }

    pub fn busy(&self) -> Option<&Busy> {
        self.busy.as_ref()
    }

    pub fn is_idle(&self) -> bool {
        self.busy.is_none()
    }

    pub fn next_timestep(&self) -> Option<u32> {
        let t = self.t_cur + 1;
        (t < i64::from(self.t_max)).then_some(t as u32)
    }

    pub fn is_done(&self) -> bool {
        self.next_timestep().is_none() && self.is_idle() && !self.rollback_pending() && self.pending.is_empty()
    }

    pub fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    pub fn has_pending_spikes(&self) -> bool {
        self.pending.iter().any(|(_, p)| p.class() == PacketClass::Spike)
    }

    pub fn next_injection(&self) -> Option<u64> {
        self.pending.front().map(|&(c, _)| c)
    }

    /// Next queued packet due by `now`.
    pub fn pop_due(&mut self, now: u64) -> Option<Packet> {
        match self.pending.front() {
            Some(&(c, _)) if c <= now => self.pending.pop_front().map(|(_, p)| p),
            _ => None,
        }
    }

    pub fn buffer_violations(&self) -> u64 {
        match &self.storage {
            Storage::Ring(b) => b.violations(),
            Storage::Log(_) => 0,
        }
    }

    /// Global ids of the neurons that fired in `t`.
    pub fn fired_at(&self, t: u32) -> impl Iterator<Item = u32> + '_ {
        self.fired[t as usize].iter().map(|&l| self.neuron_ids[l as usize])
    }

    fn accumulate(&mut self, target_t: u32, local: u32, weight: i64) {
        self.counts.synapse_acc += 1;
        match &mut self.storage {
            Storage::Ring(b) => {
                b.write(target_t, local, weight);
            }
            Storage::Log(s) => {
                let n = self.neuron_ids.len();
                s.log.entry(target_t).or_insert_with(|| vec![0; n])[local as usize] += weight;
            }
        }
    }

    /// Run the LIF update for `t` on `self.acc` (input already gathered).
    fn evaluate(&mut self, t: u32) -> Vec<u32> {
        for &(l, cur) in &self.inputs[t as usize] {
            self.acc[l as usize] += cur;
        }
        let mut fired = Vec::new();
        for i in 0..self.v.len() {
            let mut st = NeuronState { v: self.v[i], acc: self.acc[i] };
            if lif_step(&mut st, &self.params[i]).fired {
                fired.push(i as u32);
            }
            self.v[i] = st.v;
        }
        self.counts.neuron_updates += self.v.len() as u64;
        fired
    }

    /// Emit the spikes of `local` fired at `t`, advancing `cursor` by the
    /// per-packet cost.
    fn send_spikes(&mut self, t: u32, local: u32, retract: bool, cursor: &mut u64) {
        for k in 0..self.fanout[local as usize].len() {
            let f = self.fanout[local as usize][k];
            let target = t + f.delay;
            if target >= self.t_max {
                continue;
            }
            *cursor += self.costs.c_spike;
            if retract {
                self.counts.retractions_sent += 1;
            } else {
                self.counts.spikes_sent += 1;
            }
            if f.core == self.id {
                let w = i64::from(f.weight.raw());
                let row = self.synapses[f.synapse as usize];
                self.accumulate(target, row.target, if retract { -w } else { w });
            } else {
                let body = SpikeBody { synapse: f.synapse, delay: f.delay, timestep: t, retract };
                let p = Packet::new(self.coord, self.coords[f.core as usize], Body::Spike(body), self.n_vc);
                self.pending.push_back((*cursor, p));
            }
        }
    }

    /// Begin computing timestep `t` at cycle `now`. The neuron updates are
    /// evaluated immediately; their packets are released through the
    /// compute interval and the core stays busy until its end.
    pub fn start(&mut self, t: u32, now: u64) {
        debug_assert!(self.busy.is_none() && i64::from(t) == self.t_cur + 1);
        let n = self.neuron_ids.len();
        let mut acc = std::mem::take(&mut self.acc);
        match &mut self.storage {
            Storage::Ring(b) => {
                debug_assert_eq!(b.head_timestep(), t);
                b.consume_into(&mut acc);
            }
            Storage::Log(s) => {
                acc.clear();
                match s.log.get(&t) {
                    Some(a) => acc.extend_from_slice(a),
                    None => acc.resize(n, 0),
                }
                s.checkpoints.insert(t, self.v.clone());
                self.counts.buffer_writes += n as u64;
            }
        }
        self.counts.buffer_reads += n as u64;
        self.acc = acc;
        let fired = self.evaluate(t);
        let mut cursor = now + self.costs.c_sched;
        let mut next = 0;
        for i in 0..n as u32 {
            cursor += self.costs.c_update;
            if fired.get(next) == Some(&i) {
                next += 1;
                self.send_spikes(t, i, false, &mut cursor);
            }
        }
        self.fired[t as usize] = fired;
        self.last_started = i64::from(t);
        self.busy = Some(Busy { t, start: now, end: cursor.max(now + 1), kind: SegmentKind::Compute });
    }

    /// Finish the current segment if it ends by `now`.
    pub fn complete(&mut self, now: u64) -> Option<Busy> {
        match self.busy {
            Some(b) if b.end <= now => {
                self.busy = None;
                if b.kind == SegmentKind::Compute {
                    self.t_cur = i64::from(b.t);
                }
                Some(b)
            }
            _ => None,
        }
    }

    fn queue_control(&mut self, to: u32, body: Body, now: u64) {
        let p = Packet::new(self.coord, self.coords[to as usize], body, self.n_vc);
        // Ahead of any spikes queued for later cycles.
        let at = self.pending.partition_point(|&(c, _)| c <= now);
        self.pending.insert(at, (now, p));
        self.counts.scheduler_events += 1;
    }

    fn queue_dep(&mut self, to: u32, dep: DepBody, now: u64) {
        self.queue_control(to, Body::Dep(dep), now);
        self.counts.dep_sent += 1;
    }

    /// Barrier message for timestep `t` to core `to`.
    pub fn send_sync(&mut self, to: u32, t: u32, now: u64) {
        self.queue_control(to, Body::Sync { timestep: t }, now);
        self.counts.sync_sent += 1;
    }

    /// START(t) to every pre-dependency.
    pub fn emit_start(&mut self, t: u32, now: u64) {
        for i in 0..self.deps.pre_deps.len() {
            let dep = DepBody { timestep: t, flag: DepFlag::Start, dep_id: self.deps.start_row[i] };
            self.queue_dep(self.deps.pre_deps[i], dep, now);
        }
    }

    /// FINISH(t) to every post-dependency, behind the spikes of `t`.
    pub fn emit_finish(&mut self, t: u32, now: u64) {
        for j in 0..self.deps.post_deps.len() {
            let dep = DepBody { timestep: t, flag: DepFlag::Finish, dep_id: self.deps.finish_row[j] };
            self.queue_dep(self.deps.post_deps[j], dep, now);
        }
    }

    /// Handle a packet ejected at this core's router.
    pub fn receive(&mut self, p: &Packet) -> Result<(), String> {
        match p.body {
            Body::Spike(s) => {
                let row = *self
                    .synapses
                    .get(s.synapse as usize)
                    .ok_or_else(|| format!("spike names synapse row {} of {}", s.synapse, self.synapses.len()))?;
                let target = s.target_timestep();
                let w = i64::from(row.weight.raw());
                if s.retract && matches!(self.storage, Storage::Ring(_)) {
                    return Err("retraction outside speculative mode".into());
                }
                self.accumulate(target, row.target, if s.retract { -w } else { w });
                if let Storage::Log(spec) = &mut self.storage {
                    if i64::from(target) <= self.last_started {
                        self.counts.late_spikes += 1;
                        spec.rollback_to = Some(spec.rollback_to.map_or(target, |r| r.min(target)));
                    }
                }
                Ok(())
            }
            Body::Dep(d) => {
                self.counts.scheduler_events += 1;
                self.tables.on_dep_packet(&d)
            }
            Body::Sync { .. } => {
                self.counts.scheduler_events += 1;
                Ok(())
            }
        }
    }

    pub fn rollback_pending(&self) -> bool {
        matches!(&self.storage, Storage::Log(s) if s.rollback_to.is_some())
    }

    /// Restore the checkpoint of the earliest late timestep and recompute up
    /// to the last completed one, sending spikes for neurons that now fire
    /// and retractions for ones that no longer do. Each recomputed timestep
    /// costs as much as computing it the first time.
    pub fn start_rollback(&mut self, now: u64) -> Result<(), String> {
        debug_assert!(self.busy.is_none());
        let Storage::Log(spec) = &mut self.storage else {
            return Err("rollback outside speculative mode".into());
        };
        let Some(from) = spec.rollback_to.take() else {
            return Ok(());
        };
        let Some(saved) = spec.checkpoints.get(&from) else {
            return Err(format!("no checkpoint for timestep {from}"));
        };
        if i64::from(from) > self.t_cur {
            return Err(format!("rollback to {from} past last completed {}", self.t_cur));
        }
        self.v.clone_from(saved);
        self.counts.rollbacks += 1;
        let n = self.neuron_ids.len();
        let mut cursor = now;
        for t in from..=self.t_cur as u32 {
            let Storage::Log(spec) = &mut self.storage else { unreachable!() };
            spec.checkpoints.insert(t, self.v.clone());
            self.acc.clear();
            match spec.log.get(&t) {
                Some(a) => self.acc.extend_from_slice(a),
                None => self.acc.resize(n, 0),
            }
            self.counts.buffer_reads += n as u64;
            self.counts.buffer_writes += n as u64;
            let fired = self.evaluate(t);
            self.counts.rollback_updates += n as u64;
            cursor += self.costs.c_sched + self.costs.c_update * n as u64;
            let old = std::mem::take(&mut self.fired[t as usize]);
            let (mut i, mut j) = (0, 0);
            while i < fired.len() || j < old.len() {
                match (fired.get(i), old.get(j)) {
                    (Some(&a), Some(&b)) if a == b => {
                        // Fan-out is walked again even though nothing changes.
                        let live = self.fanout[a as usize].iter().filter(|f| t + f.delay < self.t_max).count();
                        cursor += self.costs.c_spike * live as u64;
                        i += 1;
                        j += 1;
                    }
                    (Some(&a), b) if b.is_none_or(|&b| a < b) => {
                        self.send_spikes(t, a, false, &mut cursor);
                        i += 1;
                    }
                    (_, Some(&b)) => {
                        self.send_spikes(t, b, true, &mut cursor);
                        j += 1;
                    }
                    _ => unreachable!(),
                }
            }
            self.fired[t as usize] = fired;
        }
        self.busy = Some(Busy {
            t: self.t_cur as u32,
            start: now,
            end: cursor.max(now + 1),
            kind: SegmentKind::Rollback,
        });
        Ok(())
    }

    /// Drop speculative history older than `t` (after a period barrier).
    pub fn prune_before(&mut self, t: u32) {
        if let Storage::Log(s) = &mut self.storage {
            s.log = s.log.split_off(&t);
            s.checkpoints = s.checkpoints.split_off(&t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, CompileOptions, PartitionStrategy};
    use crate::model::{Input, Neuron, Synapse};
    use crate::noc::Grid;

    fn neuron() -> Neuron {
        Neuron {
            params: NeuronParams { tau_m: Fix::from_int(2), v_rst: Fix::ZERO, g_l: Fix::ONE, v_th: Fix::ONE },
            v0: Fix::ZERO,
        }
    }

    /// Neuron 0 on core 0 feeds neurons 1 and 2 on core 1 and neuron 3 on
    /// core 0.
    fn two_core_net() -> Network {
        let mut net = Network::empty(6, 2);
        net.neurons = vec![neuron(); 4];
        for (dst, delay) in [(1, 1), (2, 2), (3, 1)] {
            net.synapses.push(Synapse { src: 0, dst, weight: Fix::from_int(4), delay });
        }
        net.inputs.push(Input { neuron: 0, timestep: 0, current: Fix::from_int(4) });
        net
    }

    fn cores(net: &Network, mode: Mode) -> Vec<NeuroCore> {
        let opts = CompileOptions {
            grid: Grid::new(2, 1),
            partition: PartitionStrategy::Explicit(vec![0, 1, 1, 0]),
            ..Default::default()
        };
        let p = compile(net, &opts).unwrap();
        p.cores
            .iter()
            .map(|c| {
                NeuroCore::new(
                    c,
                    &p.dep_graph.cores[c.id as usize],
                    net,
                    &p.placement.coords,
                    mode,
                    2,
                    4,
                    CoreCosts::default(),
                )
            })
            .collect()
    }

    #[test]
    fn idle_timestep_costs_updates_only() {
        let mut net = two_core_net();
        net.inputs.clear();
        let mut cs = cores(&net, Mode::DepAsync);
        cs[1].start(0, 100);
        let b = *cs[1].busy().unwrap();
        assert_eq!(b.end - b.start, 1 + 2 * 2);
        assert!(!cs[1].has_pending());
    }

    #[test]
    fn one_packet_per_remote_synapse() {
        let net = two_core_net();
        let mut cs = cores(&net, Mode::DepAsync);
        cs[0].start(0, 0);
        // fires: two remote packets, one local write
        let mut pkts = Vec::new();
        while let Some(p) = cs[0].pop_due(u64::MAX) {
            pkts.push(p);
        }
        assert_eq!(pkts.len(), 2);
        assert_eq!(cs[0].counts.spikes_sent, 3);
        let b = cs[0].complete(1000).unwrap();
        assert_eq!(b.end, 1 + 2 * 2 + 3);
        assert_eq!(cs[0].t_cur(), 0);
        for p in &pkts {
            cs[1].receive(p).unwrap();
        }
        cs[1].start(0, 0);
        cs[1].complete(1000);
        cs[1].start(1, 1000);
        assert_eq!(cs[1].fired_at(1).collect::<Vec<_>>(), vec![1]);
        cs[1].complete(2000);
        cs[1].start(2, 2000);
        assert_eq!(cs[1].fired_at(2).collect::<Vec<_>>(), vec![2]);
        cs[0].start(1, 1000);
        assert_eq!(cs[0].fired_at(1).collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn dep_packets_carry_receiver_rows() {
        let net = two_core_net();
        let mut cs = cores(&net, Mode::DepAsync);
        cs[1].emit_start(3, 7);
        let p = cs[1].pop_due(7).unwrap();
        assert_eq!(p.header.dst, cs[0].coord);
        cs[0].receive(&p).unwrap();
        assert_eq!(cs[0].tables.post_start, vec![3]);
        cs[0].emit_finish(2, 9);
        let p = cs[0].pop_due(9).unwrap();
        cs[1].receive(&p).unwrap();
        assert_eq!(cs[1].tables.pre_finish, vec![2]);
        // core 0 has no pre-dependencies
        cs[0].emit_start(1, 0);
        assert!(cs[0].pop_due(u64::MAX).is_none());
    }

    #[test]
    fn late_spike_triggers_rollback_and_recompute() {
        let net = two_core_net();
        let mut cs = cores(&net, Mode::Se);
        // consumer runs ahead through t = 0..=3 with no input
        for t in 0..4 {
            cs[1].start(t, u64::from(t) * 100);
            cs[1].complete(u64::MAX);
        }
        assert!(cs[1].fired_at(1).next().is_none());
        // producer fires at 0; its spikes for t=1 and t=2 arrive late
        cs[0].start(0, 0);
        while let Some(p) = cs[0].pop_due(u64::MAX) {
            cs[1].receive(&p).unwrap();
        }
        assert!(cs[1].rollback_pending());
        assert_eq!(cs[1].counts.late_spikes, 2);
        cs[1].start_rollback(1000).unwrap();
        assert_eq!(cs[1].counts.rollback_updates, 3 * 2);
        let b = cs[1].complete(u64::MAX).unwrap();
        assert_eq!(b.kind, SegmentKind::Rollback);
        assert_eq!(b.end - b.start, 3 * (1 + 2 * 2));
        assert_eq!(cs[1].t_cur(), 3);
        assert_eq!(cs[1].fired_at(1).collect::<Vec<_>>(), vec![1]);
        assert_eq!(cs[1].fired_at(2).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn retraction_undoes_spike() {
        let net = two_core_net();
        let mut cs = cores(&net, Mode::Se);
        let mut cs_ref = cores(&net, Mode::Se);
        cs[0].start(0, 0);
        let p = cs[0].pop_due(u64::MAX).unwrap();
        let Body::Spike(mut s) = p.body else { panic!() };
        cs[1].receive(&p).unwrap();
        s.retract = true;
        cs[1].receive(&Packet { body: Body::Spike(s), ..p }).unwrap();
        for c in [&mut cs[1], &mut cs_ref[1]] {
            for t in 0..3 {
                c.start(t, 0);
                c.complete(u64::MAX);
            }
        }
        for t in 0..3 {
            assert_eq!(cs[1].fired_at(t).collect::<Vec<_>>(), cs_ref[1].fired_at(t).collect::<Vec<_>>());
        }
    }

    #[test]
    fn bad_synapse_row_is_a_fault() {
        let net = two_core_net();
        let mut cs = cores(&net, Mode::DepAsync);
        let body = SpikeBody { synapse: 99, delay: 1, timestep: 0, retract: false };
        let p = Packet::new(cs[0].coord, cs[1].coord, Body::Spike(body), 4);
        assert!(cs[1].receive(&p).is_err());
    }
}
