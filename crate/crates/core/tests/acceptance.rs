//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

mod common;

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use depasync::compiler::compile;
use depasync::engine::{SchedKind, SimReport};
use depasync::metrics::EnergyCostTable;
use depasync::model::{gen_layered, gen_synthetic, LayeredSpec, RateKnobs, RotatingBurstSpec, SyntheticSpec};
use depasync::neurocore::BlockReason;
use depasync::noc::{Body, Coord, DepBody, DepFlag, Grid, Mesh, NocConfig, Packet, PacketClass, SpikeBody};
use depasync::{compile_and_run, reference_run, Mode, Network, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn run(net: &Network, cfg: &SimConfig, mode: Mode) -> SimReport {
    compile_and_run(net, &SimConfig { mode, ..cfg.clone() }).unwrap_or_else(|e| panic!("{mode}: {e}"))
}

fn speedup(base: &SimReport, fast: &SimReport) -> f64 {
    base.total_cycles as f64 / fast.total_cycles as f64
}

struct SuiteRun {
    name: String,
    n_neurons: usize,
    t_max: u32,
    reports: Vec<SimReport>,
    matches: Vec<bool>,
}

struct Suite {
    runs: Vec<SuiteRun>,
    elapsed: Duration,
}

/// Twenty seeded synthetic workloads and five layered ones, each run in
/// every mode. Shared by the accuracy, safety and energy checks.
fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let t0 = Instant::now();
        let mut nets: Vec<(String, Network)> = (0..20)
            .map(|seed| {
                let spec = SyntheticSpec { seed, ..Default::default() };
                (format!("synthetic seed {seed}"), gen_synthetic(&spec).unwrap())
            })
            .collect();
        for seed in 0..5 {
            nets.push((format!("layered seed {seed}"), gen_layered(&LayeredSpec { seed, ..Default::default() }).unwrap()));
        }
        let cfg = SimConfig::default();
        let runs = nets
            .par_iter()
            .map(|(name, net)| {
                let want = reference_run(net).unwrap();
                let reports: Vec<SimReport> = Mode::ALL.iter().map(|&m| run(net, &cfg, m)).collect();
                let matches = reports.iter().map(|r| r.raster == want).collect();
                SuiteRun { name: name.clone(), n_neurons: net.n_neurons(), t_max: net.t_max, reports, matches }
            })
            .collect();
        Suite { runs, elapsed: t0.elapsed() }
    })
}

#[test]
fn time_accuracy() {
    let s = suite();
    let mut bad = Vec::new();
    for r in &s.runs {
        for (rep, ok) in r.reports.iter().zip(&r.matches) {
            if !ok {
                bad.push(format!("{} {}", r.name, rep.mode));
            }
        }
    }
    let budget = Duration::from_secs(300);
    verdict(
        "time_accuracy",
        bad.is_empty() && s.elapsed < budget,
        format!(
            "{} workloads x 3 modes, {} divergent rasters {:?}, suite took {:.1}s",
            s.runs.len(),
            bad.len(),
            bad,
            s.elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn scheduler_safety() {
    let s = suite();
    let mut worst = (0u64, 0u64);
    let mut first = None;
    for r in &s.runs {
        for rep in &r.reports {
            worst.0 += rep.safety.buffer_violations;
            worst.1 += rep.safety.invariant_violations;
            if first.is_none() {
                first.clone_from(&rep.safety.first_violation);
            }
        }
    }
    verdict(
        "scheduler_safety",
        worst == (0, 0),
        format!("buffer violations {}, ordering violations {}, first {:?}", worst.0, worst.1, first),
    );
}

#[test]
fn four_core_trace_replay() {
    let (net, cfg) = common::four_core_example();
    let r = run(&net, &cfg, Mode::DepAsync);
    let ev = &r.schedule;
    let c0_post_block = ev
        .iter()
        .any(|e| e.core == 0 && e.kind == SchedKind::Blocked { t: 3, reason: BlockReason::Post });
    let c3_pre_block = ev
        .iter()
        .position(|e| e.core == 3 && e.kind == SchedKind::Blocked { t: 2, reason: BlockReason::Pre });
    let c3_start = ev.iter().position(|e| e.core == 3 && e.kind == SchedKind::Started { t: 2 });
    let finish_from = |from: u32| {
        ev.iter().position(|e| {
            e.core == 3 && matches!(e.kind, SchedKind::DepReceived { from: f, flag: DepFlag::Finish, t } if f == from && t >= 1)
        })
    };
    let (f1, f2) = (finish_from(1), finish_from(2));
    let released_by_finish = match (c3_pre_block, c3_start, f1, f2) {
        (Some(b), Some(s), Some(f1), Some(f2)) => {
            let last = f1.max(f2);
            b < last && last < s && ev[last].cycle == ev[s].cycle
        }
        _ => false,
    };
    let exact = r.raster == reference_run(&net).unwrap();
    verdict(
        "four_core_trace_replay",
        c0_post_block && released_by_finish && exact,
        format!(
            "c0 blocked by post before t3: {c0_post_block}; c3 held by pre at t2 then started on the arrival of the FINISH packets from c1 and c2: {released_by_finish}; raster exact: {exact}"
        ),
    );
}

#[test]
fn unit_window_lockstep() {
    let cfg = SimConfig { m: 1, ..Default::default() };
    let nets: Vec<Network> = (0..3)
        .map(|seed| gen_layered(&LayeredSpec { seed, ..Default::default() }).unwrap())
        .chain([gen_layered(&LayeredSpec { layer_sizes: vec![128, 128, 128, 64, 32], seed: 7, ..Default::default() }).unwrap()])
        .collect();
    let rows: Vec<(u64, f64, bool)> = nets
        .par_iter()
        .map(|net| {
            assert!(compile(net, &cfg.compile_options()).unwrap().dep_graph.is_acyclic());
            let sync = run(net, &cfg, Mode::Sync);
            let da = run(net, &cfg, Mode::DepAsync);
            (da.safety.max_edge_skew, da.total_cycles as f64 / sync.total_cycles as f64, da.safety.invariant_violations == 0)
        })
        .collect();
    let pass = rows.iter().all(|&(skew, ratio, ok)| skew <= 1 && (0.9..=1.1).contains(&ratio) && ok);
    let desc: Vec<String> = rows.iter().map(|(s, r, _)| format!("skew {s} cycles/sync {r:.3}")).collect();
    verdict("unit_window_lockstep", pass, desc.join(", "));
}

fn burst() -> Network {
    RotatingBurstSpec::default().generate().unwrap()
}

#[test]
fn imbalanced_speedup() {
    let net = burst();
    let cfg = SimConfig::default();
    let [sync, se, da] = Mode::ALL.map(|m| run(&net, &cfg, m));
    let s = speedup(&sync, &da);
    verdict(
        "imbalanced_speedup",
        da.total_cycles < sync.total_cycles && s >= 1.2 && da.total_cycles <= se.total_cycles,
        format!(
            "sync {} se {} (rollback {}) depasync {} cycles, speedup {s:.3}",
            sync.total_cycles,
            se.total_cycles,
            se.rollback_cycles(),
            da.total_cycles
        ),
    );
}

#[test]
fn window_monotonicity() {
    let net = burst();
    let sync = run(&net, &SimConfig::default(), Mode::Sync);
    let speedups: Vec<f64> = [2, 4, 8, 16]
        .par_iter()
        .map(|&m| speedup(&sync, &run(&net, &SimConfig { m, ..Default::default() }, Mode::DepAsync)))
        .collect();
    let pass = speedups.windows(2).all(|w| w[1] >= w[0] * 0.99);
    verdict("window_monotonicity", pass, format!("speedup over sync at m = 2, 4, 8, 16: {speedups:.3?}"));
}

#[test]
fn firing_rate_crossover() {
    let levels = [0.0, 0.4, 0.6, 0.8];
    let seeds = [1u64, 2];
    let cells: Vec<(usize, f64, f64, f64)> = levels
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| seeds.iter().map(move |&s| (i, l, s)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(i, level, seed)| {
            let net = gen_synthetic(&SyntheticSpec { seed, rate: RateKnobs::level(level), ..Default::default() }).unwrap();
            let cfg = SimConfig::default();
            let se = run(&net, &cfg, Mode::Se);
            let da = run(&net, &cfg, Mode::DepAsync);
            let rate = reference_run(&net).unwrap().firing_rate(net.n_neurons(), net.t_max);
            (i, se.rollback_share(), speedup(&se, &da), rate)
        })
        .collect();
    let mean = |i: usize, f: fn(&(usize, f64, f64, f64)) -> f64| {
        let v: Vec<f64> = cells.iter().filter(|c| c.0 == i).map(f).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let rb: Vec<f64> = (0..levels.len()).map(|i| mean(i, |c| c.1)).collect();
    let adv: Vec<f64> = (0..levels.len()).map(|i| mean(i, |c| c.2)).collect();
    let rate: Vec<f64> = (0..levels.len()).map(|i| mean(i, |c| c.3)).collect();
    let pass = rb.windows(2).all(|w| w[1] > w[0]) && adv.windows(2).all(|w| w[1] > w[0]);
    verdict(
        "firing_rate_crossover",
        pass,
        format!("firing rate {rate:.3?}: se rollback share {rb:.3?}, depasync advantage over se {adv:.3?}"),
    );
}

#[test]
fn cyclic_fallback() {
    let net = gen_layered(&LayeredSpec::default()).unwrap();
    let base = SimConfig::default();
    let cyclic = SimConfig { cyclic_fraction: 0.25, ..Default::default() };
    let acyclic_graph = compile(&net, &base.compile_options()).unwrap().dep_graph.is_acyclic();
    let cyclic_graph = !compile(&net, &cyclic.compile_options()).unwrap().dep_graph.is_acyclic();
    let a = compile_and_run(&net, &base).unwrap();
    let c = compile_and_run(&net, &cyclic);
    let (ok, detail) = match c {
        Ok(c) => {
            let slowdown = c.total_cycles as f64 / a.total_cycles as f64 - 1.0;
            let exact = c.raster == reference_run(&net).unwrap();
            (
                slowdown > 0.0 && exact,
                format!("acyclic {} cycles, cyclic {} cycles, slowdown {:.1}%, raster exact {exact}", a.total_cycles, c.total_cycles, slowdown * 100.0),
            )
        }
        Err(e) => (false, format!("cyclic run failed: {e}")),
    };
    verdict("cyclic_fallback", ok && acyclic_graph && cyclic_graph, detail);
}

#[test]
fn scalability_direction() {
    let shapes = [(16u32, Grid::new(4, 4)), (64, Grid::new(8, 8))];
    let speedups: Vec<f64> = shapes
        .par_iter()
        .map(|&(cores, grid)| {
            let spec = SyntheticSpec::scaled(cores, 16, 1).unwrap();
            let net = gen_synthetic(&spec).unwrap();
            let cfg = SimConfig { grid, ..Default::default() };
            speedup(&run(&net, &cfg, Mode::Sync), &run(&net, &cfg, Mode::DepAsync))
        })
        .collect();
    verdict(
        "scalability_direction",
        speedups[1] >= speedups[0],
        format!("depasync speedup over sync: 4x4 {:.3}, 8x8 {:.3}", speedups[0], speedups[1]),
    );
}

/// Random single-flit traffic: every packet is delivered once, to the right
/// router, and no FINISH overtakes an older spike of its own flow.
fn random_traffic(n_packets: usize, seed: u64) -> Result<(), String> {
    let grid = Grid::new(4, 4);
    let mut mesh = Mesh::new(grid, NocConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan: Vec<(u64, Coord, Packet)> = Vec::with_capacity(n_packets);
    let mut step_of = HashMap::new();
    for i in 0..n_packets {
        let src = grid.coord(rng.gen_range(0..grid.cells()));
        let dst = grid.coord(rng.gen_range(0..grid.cells()));
        let key = (src, dst);
        let t: &mut u32 = step_of.entry(key).or_insert(0);
        let body = if rng.gen_bool(0.2) {
            let b = Body::Dep(DepBody { timestep: *t, flag: DepFlag::Finish, dep_id: 0 });
            *t += 1;
            b
        } else {
            Body::Spike(SpikeBody { synapse: i as u32, delay: 1, timestep: *t, retract: false })
        };
        plan.push(((i / 8) as u64, src, Packet::new(src, dst, body, 4)));
    }
    let mut out = Vec::new();
    let mut delivered = Vec::new();
    let mut next = 0;
    let mut now = 0u64;
    while next < plan.len() || !mesh.is_empty() {
        while next < plan.len() && plan[next].0 <= now {
            mesh.inject(plan[next].1, plan[next].2, now).map_err(|e| e.to_string())?;
            next += 1;
        }
        mesh.step(now, &mut out);
        for p in out.drain(..) {
            delivered.push(p);
        }
        now += 1;
        if now > 10_000_000 {
            return Err("traffic did not drain".into());
        }
    }
    if delivered.len() != plan.len() || mesh.stats().injected.total() != mesh.stats().ejected.total() {
        return Err(format!("{} injected, {} delivered", plan.len(), delivered.len()));
    }
    let mut seen = vec![false; plan.len()];
    let mut finished: HashMap<(Coord, Coord), i64> = HashMap::new();
    for p in &delivered {
        match p.body {
            Body::Spike(s) => {
                if seen[s.synapse as usize] {
                    return Err(format!("spike {} delivered twice", s.synapse));
                }
                seen[s.synapse as usize] = true;
                if plan[s.synapse as usize].2 != *p {
                    return Err(format!("spike {} altered or misrouted", s.synapse));
                }
                let f = finished.get(&(p.header.src, p.header.dst)).copied().unwrap_or(-1);
                if i64::from(s.timestep) <= f {
                    return Err(format!("FINISH {f} from {} to {} overtook a spike of {}", p.header.src, p.header.dst, s.timestep));
                }
            }
            Body::Dep(d) => {
                finished.insert((p.header.src, p.header.dst), i64::from(d.timestep));
            }
            Body::Sync { .. } => {}
        }
    }
    let spikes = plan.iter().filter(|p| p.2.class() == PacketClass::Spike).count();
    if seen.iter().filter(|&&s| s).count() != spikes {
        return Err("spikes lost".into());
    }
    Ok(())
}

#[test]
fn noc_properties() {
    let traffic = random_traffic(10_000, 11);
    let net = gen_layered(&LayeredSpec { input_rate: 0.4, ..Default::default() }).unwrap();
    let blocked: Vec<u64> = [2u8, 4, 8]
        .par_iter()
        .map(|&n_vc| run(&net, &SimConfig { n_vc, ..Default::default() }, Mode::DepAsync).noc.blocked_cycles.total())
        .collect();
    let falling = blocked.windows(2).all(|w| w[1] < w[0]);
    verdict(
        "noc_properties",
        traffic.is_ok() && falling,
        format!("10000-packet traffic: {traffic:?}; blocked flit-cycles at 2, 4, 8 VCs: {blocked:?}"),
    );
}

/// Energy recomputed from the raw counters without the library's model.
fn recompute(r: &SimReport, c: &EnergyCostTable) -> u64 {
    let k = &r.counts;
    k.neuron_updates * c.neuron_update
        + k.synapse_acc * c.synapse_acc
        + k.buffer_reads * c.buffer_read
        + k.buffer_writes * c.buffer_write
        + k.scheduler_events * c.scheduler_event
        + k.noc_hops * c.noc_hop
        + r.cores.len() as u64 * r.total_cycles * c.static_per_core_cycle
}

#[test]
fn energy_identity() {
    let costs = EnergyCostTable::default();
    let mut problems = Vec::new();
    let mut runs = 0;
    for r in &suite().runs {
        let base = r.n_neurons as u64 * u64::from(r.t_max);
        for rep in &r.reports {
            runs += 1;
            let tag = format!("{} {}", r.name, rep.mode);
            if recompute(rep, &costs) != rep.energy.total {
                problems.push(format!("{tag}: energy {} vs {}", rep.energy.total, recompute(rep, &costs)));
            }
            let per_core: u64 = rep.cores.iter().map(|c| c.counts.neuron_updates).sum();
            if per_core != rep.counts.neuron_updates {
                problems.push(format!("{tag}: per-core updates do not add up"));
            }
            let expected = match rep.mode {
                Mode::Se => base + rep.activity.rollback_updates,
                _ => base,
            };
            if rep.counts.neuron_updates != expected {
                problems.push(format!("{tag}: {} updates, expected {expected}", rep.counts.neuron_updates));
            }
        }
    }
    verdict("energy_identity", problems.is_empty(), format!("{runs} runs checked, problems {problems:?}"));
}
