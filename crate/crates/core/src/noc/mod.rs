//! 2D-mesh network-on-chip: single-flit packets, XY routing, routers with
//! per-port virtual channels and round-robin arbitration.

mod geometry;
mod packet;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::NocError;

pub use geometry::{Coord, Grid};
pub use packet::{assign_vc, Body, DepBody, DepFlag, Header, Packet, PacketClass, SpikeBody};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    Local = 0,
    East = 1,
    West = 2,
    North = 3,
    South = 4,
}

impl Port {
    pub const ALL: [Port; 5] = [Port::Local, Port::East, Port::West, Port::North, Port::South];

    pub fn opposite(self) -> Port {
        match self {
            Port::Local => Port::Local,
            Port::East => Port::West,
            Port::West => Port::East,
            Port::North => Port::South,
            Port::South => Port::North,
        }
    }
}

fn xy_port(cur: Coord, dst: Coord) -> Port {
    use std::cmp::Ordering::*;
    match (dst.x.cmp(&cur.x), dst.y.cmp(&cur.y)) {
        (Greater, _) => Port::East,
        (Less, _) => Port::West,
        (Equal, Greater) => Port::North,
        (Equal, Less) => Port::South,
        (Equal, Equal) => Port::Local,
    }
}

/// Output port for a packet at `cur` heading to `dst`; X is resolved first.
pub fn route_xy(grid: Grid, cur: Coord, dst: Coord) -> Result<Port, NocError> {
    for c in [cur, dst] {
        if !grid.contains(c) {
            return Err(NocError::OutOfGrid(c, grid.w, grid.h));
        }
    }
    Ok(xy_port(cur, dst))
}

fn step_toward(c: Coord, port: Port) -> Coord {
    match port {
        Port::Local => c,
        Port::East => Coord::new(c.x + 1, c.y),
        Port::West => Coord::new(c.x - 1, c.y),
        Port::North => Coord::new(c.x, c.y + 1),
        Port::South => Coord::new(c.x, c.y - 1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NocConfig {
    pub n_vc: u8,
    /// Flits per VC buffer on router-to-router input ports.
    pub vc_depth: usize,
    pub cycles_per_hop: u32,
    /// Routers per cluster; `None` makes the whole mesh one cluster.
    pub cluster_size: Option<Grid>,
    /// Hop-latency multiplier for links that cross a cluster boundary.
    pub inter_cluster_slowdown: u32,
}

impl Default for NocConfig {
    fn default() -> Self {
        NocConfig { n_vc: 4, vc_depth: 4, cycles_per_hop: 2, cluster_size: None, inter_cluster_slowdown: 1 }
    }
}

/// Per-class counter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerClass {
    pub spike: u64,
    pub dep: u64,
    pub sync: u64,
}

impl PerClass {
    pub fn get(&self, c: PacketClass) -> u64 {
        match c {
            PacketClass::Spike => self.spike,
            PacketClass::Dep => self.dep,
            PacketClass::Sync => self.sync,
        }
    }

    pub fn get_mut(&mut self, c: PacketClass) -> &mut u64 {
        match c {
            PacketClass::Spike => &mut self.spike,
            PacketClass::Dep => &mut self.dep,
            PacketClass::Sync => &mut self.sync,
        }
    }

    pub fn total(&self) -> u64 {
        self.spike + self.dep + self.sync
    }
}

/// Buckets of the per-router occupancy histogram; the last one collects
/// everything at or above it.
pub const OCCUPANCY_BUCKETS: usize = 17;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NocStats {
    pub injected: PerClass,
    pub ejected: PerClass,
    /// Router-to-router link traversals.
    pub hops: PerClass,
    /// Flit-cycles spent ready to move but not granted.
    pub blocked_cycles: PerClass,
    pub latency_sum: PerClass,
    pub max_latency: u64,
    /// `occupancy[r][k]`: cycles router `r` held `k` flits.
    pub occupancy: Vec<Vec<u64>>,
}

impl NocStats {
    pub fn mean_latency(&self, c: PacketClass) -> f64 {
        let n = self.ejected.get(c);
        if n == 0 {
            0.0
        } else {
            self.latency_sum.get(c) as f64 / n as f64
        }
    }
}

#[derive(Clone, Debug)]
struct Flit {
    packet: Packet,
    ready_at: u64,
    injected_at: u64,
}

#[derive(Clone, Debug)]
struct Router {
    coord: Coord,
    /// `inputs[port][vc]`
    inputs: [Vec<VecDeque<Flit>>; 5],
    rr_vc: [usize; 5],
    rr_port: usize,
    occupancy: usize,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    grid: Grid,
    cfg: NocConfig,
    routers: Vec<Router>,
    stats: NocStats,
    in_flight: PerClass,
}

impl Mesh {
    pub fn new(grid: Grid, cfg: NocConfig) -> Self {
        let n_vc = usize::from(cfg.n_vc.max(1));
        let routers = (0..grid.cells())
            .map(|i| Router {
                coord: grid.coord(i),
                inputs: std::array::from_fn(|_| vec![VecDeque::new(); n_vc]),
                rr_vc: [0; 5],
                rr_port: 0,
                occupancy: 0,
            })
            .collect();
        let stats = NocStats { occupancy: vec![vec![0; OCCUPANCY_BUCKETS]; grid.cells()], ..Default::default() };
        Mesh { grid, cfg: NocConfig { n_vc: n_vc as u8, ..cfg }, routers, stats, in_flight: PerClass::default() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn config(&self) -> &NocConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &NocStats {
        &self.stats
    }

    pub fn into_stats(self) -> NocStats {
        self.stats
    }

    pub fn in_flight(&self, c: PacketClass) -> u64 {
        self.in_flight.get(c)
    }

    pub fn is_empty(&self) -> bool {
        self.in_flight.total() == 0
    }

    /// Earliest cycle at which some resident flit may move.
    pub fn next_ready(&self) -> Option<u64> {
        self.routers
            .iter()
            .filter(|r| r.occupancy > 0)
            .flat_map(|r| r.inputs.iter().flatten().filter_map(|q| q.front()))
            .map(|f| f.ready_at)
            .min()
    }

    /// Queue a packet at its source router's local port.
    pub fn inject(&mut self, at: Coord, packet: Packet, now: u64) -> Result<(), NocError> {
        if at != packet.header.src {
            return Err(NocError::WrongInjectionPoint { at, src: packet.header.src });
        }
        for c in [packet.header.src, packet.header.dst] {
            if !self.grid.contains(c) {
                return Err(NocError::OutOfGrid(c, self.grid.w, self.grid.h));
            }
        }
        let vc = usize::from(packet.header.vc).min(usize::from(self.cfg.n_vc) - 1);
        let r = &mut self.routers[self.grid.index(at)];
        r.inputs[Port::Local as usize][vc].push_back(Flit {
            packet,
            ready_at: now + u64::from(self.cfg.cycles_per_hop),
            injected_at: now,
        });
        r.occupancy += 1;
        *self.stats.injected.get_mut(packet.class()) += 1;
        *self.in_flight.get_mut(packet.class()) += 1;
        Ok(())
    }

    fn cluster_of(&self, c: Coord) -> (u32, u32) {
        match self.cfg.cluster_size {
            Some(cl) => (c.x / cl.w.max(1), c.y / cl.h.max(1)),
            None => (0, 0),
        }
    }

    fn hop_cycles(&self, from: Coord, to: Coord) -> u64 {
        let base = u64::from(self.cfg.cycles_per_hop);
        if self.cluster_of(from) != self.cluster_of(to) {
            base * u64::from(self.cfg.inter_cluster_slowdown.max(1))
        } else {
            base
        }
    }

    /// VC of input port `p` at router `r` to grant this cycle, with its
    /// output port.
    fn pick(&self, r: usize, p: usize, now: u64, out_used: &[bool; 5]) -> Option<(usize, Port)> {
        let router = &self.routers[r];
        let port = &router.inputs[p];
        let n_vc = port.len();
        for j in 0..n_vc {
            let v = (router.rr_vc[p] + j) % n_vc;
            let Some(head) = port[v].front() else { continue };
            if head.ready_at > now {
                continue;
            }
            if head.packet.is_finish() && port.iter().flatten().any(|f| f.packet.holds_back(&head.packet)) {
                continue;
            }
            let out = xy_port(router.coord, head.packet.header.dst);
            if out_used[out as usize] {
                continue;
            }
            if out != Port::Local {
                let nbr = self.grid.index(step_toward(router.coord, out));
                if self.routers[nbr].inputs[out.opposite() as usize][v].len() >= self.cfg.vc_depth {
                    continue;
                }
            }
            return Some((v, out));
        }
        None
    }

    /// Advance every router by one cycle. Packets reaching their destination
    /// are appended to `ejected` in grant order.
    pub fn step(&mut self, now: u64, ejected: &mut Vec<Packet>) {
        for r in 0..self.routers.len() {
            if self.routers[r].occupancy == 0 {
                self.stats.occupancy[r][0] += 1;
                continue;
            }
            let mut out_used = [false; 5];
            let first = self.routers[r].rr_port;
            for k in 0..5 {
                let p = (first + k) % 5;
                let Some((v, out)) = self.pick(r, p, now, &out_used) else { continue };
                out_used[out as usize] = true;
                let router = &mut self.routers[r];
                let flit = router.inputs[p][v].pop_front().expect("picked head exists");
                router.occupancy -= 1;
                router.rr_vc[p] = (v + 1) % router.inputs[p].len();
                let from = router.coord;
                if out == Port::Local {
                    let class = flit.packet.class();
                    let latency = now - flit.injected_at;
                    *self.stats.ejected.get_mut(class) += 1;
                    *self.stats.latency_sum.get_mut(class) += latency;
                    self.stats.max_latency = self.stats.max_latency.max(latency);
                    *self.in_flight.get_mut(class) -= 1;
                    ejected.push(flit.packet);
                } else {
                    let to = step_toward(from, out);
                    let ready_at = now + self.hop_cycles(from, to);
                    let nbr = &mut self.routers[self.grid.index(to)];
                    nbr.inputs[out.opposite() as usize][v].push_back(Flit { ready_at, ..flit });
                    nbr.occupancy += 1;
                    *self.stats.hops.get_mut(flit.packet.class()) += 1;
                }
            }
            let router = &mut self.routers[r];
            router.rr_port = (router.rr_port + 1) % 5;
            for f in router.inputs.iter().flatten().flatten() {
                if f.ready_at <= now {
                    *self.stats.blocked_cycles.get_mut(f.packet.class()) += 1;
                }
            }
            self.stats.occupancy[r][router.occupancy.min(OCCUPANCY_BUCKETS - 1)] += 1;
        }
    }

    /// Account for `cycles` cycles in which nothing was ready to move.
    pub fn skip(&mut self, cycles: u64) {
        for (r, router) in self.routers.iter().enumerate() {
            self.stats.occupancy[r][router.occupancy.min(OCCUPANCY_BUCKETS - 1)] += cycles;
        }
    }
}
