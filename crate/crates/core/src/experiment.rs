//! Parameter sweeps: one simulation per (axis value, seed, repetition, mode),
//! run in parallel, flattened into a results table, and summarised with
//! harmonic-mean speedups against the sync baseline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::MappingKind;
use crate::engine::{compile_and_run, SimConfig, SimReport};
use crate::error::SimError;
use crate::model::{reference_run, WorkloadSpec};
use crate::neurocore::Mode;
use crate::noc::Grid;

/// The single parameter a sweep varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Axis {
    M(Vec<u32>),
    /// Firing-rate dial of synthetic workloads, 0 to 1.
    Rate(Vec<f64>),
    Vc(Vec<u8>),
    Grid(Vec<Grid>),
    Mode(Vec<Mode>),
    Mapping(Vec<MappingKind>),
    /// Fraction of neurons exchanged with core 0.
    Cyclic(Vec<f64>),
}

fn parse_list<T: FromStr>(key: &str, vals: &str) -> Result<Vec<T>, String> {
    vals.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("bad value {v:?} for axis {key}")))
        .collect()
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (key, vals) = s.split_once('=').ok_or_else(|| format!("axis {s:?} is not key=v1,v2,..."))?;
        let key = key.trim();
        let axis = match key {
            "m" => Axis::M(parse_list(key, vals)?),
            "rate" => Axis::Rate(parse_list(key, vals)?),
            "vc" | "n_vc" => Axis::Vc(parse_list(key, vals)?),
            "grid" => Axis::Grid(parse_list(key, vals)?),
            "mode" => Axis::Mode(parse_list(key, vals)?),
            "mapping" => Axis::Mapping(parse_list(key, vals)?),
            "cyclic" | "cyclic_fraction" => Axis::Cyclic(parse_list(key, vals)?),
            _ => return Err(format!("unknown axis {key:?} (expected m, rate, vc, grid, mode, mapping or cyclic)")),
        };
        Ok(axis)
    }
}

impl TryFrom<String> for Axis {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Axis> for String {
    fn from(a: Axis) -> String {
        a.to_string()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.key(), self.values().join(","))
    }
}

impl Axis {
    pub fn key(&self) -> &'static str {
        match self {
            Axis::M(_) => "m",
            Axis::Rate(_) => "rate",
            Axis::Vc(_) => "vc",
            Axis::Grid(_) => "grid",
            Axis::Mode(_) => "mode",
            Axis::Mapping(_) => "mapping",
            Axis::Cyclic(_) => "cyclic",
        }
    }

    pub fn values(&self) -> Vec<String> {
        fn strs<T: ToString>(v: &[T]) -> Vec<String> {
            v.iter().map(T::to_string).collect()
        }
        match self {
            Axis::M(v) => strs(v),
            Axis::Rate(v) => strs(v),
            Axis::Vc(v) => strs(v),
            Axis::Grid(v) => strs(v),
            Axis::Mode(v) => strs(v),
            Axis::Mapping(v) => v.iter().map(|m| format!("{m:?}").to_lowercase()).collect(),
            Axis::Cyclic(v) => strs(v),
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Config and workload for the `i`-th value.
    fn apply(&self, i: usize, cfg: &mut SimConfig, workload: &mut WorkloadSpec) {
        match self {
            Axis::M(v) => cfg.m = v[i],
            Axis::Rate(v) => *workload = workload.with_rate_level(v[i]),
            Axis::Vc(v) => cfg.n_vc = v[i],
            Axis::Grid(v) => cfg.grid = v[i],
            Axis::Mode(v) => cfg.mode = v[i],
            Axis::Mapping(v) => cfg.mapping = v[i],
            Axis::Cyclic(v) => cfg.cyclic_fraction = v[i],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub base: SimConfig,
    pub workload: WorkloadSpec,
    pub axis: Axis,
    /// Modes run at every point. Ignored when the axis itself is the mode.
    #[serde(default = "all_modes")]
    pub modes: Vec<Mode>,
    /// Repetition `r` compiles with `base.seed + r`, which reshuffles the
    /// neurons exchanged with core 0; other runs repeat identically.
    #[serde(default = "one")]
    pub reps: u32,
    #[serde(default = "seed_zero")]
    pub seeds: Vec<u64>,
}

fn all_modes() -> Vec<Mode> {
    Mode::ALL.to_vec()
}
fn one() -> u32 {
    1
}
fn seed_zero() -> Vec<u64> {
    vec![0]
}

impl ExperimentSpec {
    pub fn new(base: SimConfig, workload: WorkloadSpec, axis: Axis) -> Self {
        ExperimentSpec { base, workload, axis, modes: all_modes(), reps: 1, seeds: seed_zero() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |s: String| Err(SimError::Config(s));
        if self.axis.is_empty() {
            return bad(format!("axis {} has no values", self.axis.key()));
        }
        if self.seeds.is_empty() || self.reps == 0 || self.modes.is_empty() {
            return bad("seeds, reps and modes must be non-empty".into());
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if matches!(self.axis, Axis::Rate(_)) && !matches!(self.workload, WorkloadSpec::Synthetic(_)) {
            return bad("the rate axis needs a synthetic workload".into());
        }
        self.base.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes")
    }

    fn points(&self) -> Vec<Point> {
        let modes: Vec<Option<Mode>> = match self.axis {
            Axis::Mode(_) => vec![None],
            _ => self.modes.iter().copied().map(Some).collect(),
        };
        let mut out = Vec::new();
        for i in 0..self.axis.len() {
            for &seed in &self.seeds {
                for rep in 0..self.reps {
                    for &mode in &modes {
                        out.push(Point { i, seed, rep, mode });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Point {
    i: usize,
    seed: u64,
    rep: u32,
    mode: Option<Mode>,
}

/// One simulation, flattened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis: String,
    pub value: String,
    pub seed: u64,
    pub rep: u32,
    pub mode: Mode,
    pub exact: bool,
    pub total_cycles: u64,
    pub busy_cycles: u64,
    pub wait_cycles: u64,
    pub rollback_cycles: u64,
    pub cores: u32,
    pub spikes: u64,
    pub neuron_updates: u64,
    pub rollback_updates: u64,
    pub synapse_acc: u64,
    pub buffer_reads: u64,
    pub buffer_writes: u64,
    pub scheduler_events: u64,
    pub noc_hops: u64,
    pub dep_hops: u64,
    pub noc_blocked: u64,
    pub max_edge_skew: u64,
    pub energy: u64,
}

impl ResultRow {
    fn new(axis: &Axis, i: usize, seed: u64, rep: u32, r: &SimReport, exact: bool) -> Self {
        ResultRow {
            axis: axis.key().to_string(),
            value: axis.values()[i].clone(),
            seed,
            rep,
            mode: r.mode,
            exact,
            total_cycles: r.total_cycles,
            busy_cycles: r.busy_cycles(),
            wait_cycles: r.wait_cycles(),
            rollback_cycles: r.rollback_cycles(),
            cores: r.cores.len() as u32,
            spikes: r.raster.len() as u64,
            neuron_updates: r.counts.neuron_updates,
            rollback_updates: r.activity.rollback_updates,
            synapse_acc: r.counts.synapse_acc,
            buffer_reads: r.counts.buffer_reads,
            buffer_writes: r.counts.buffer_writes,
            scheduler_events: r.counts.scheduler_events,
            noc_hops: r.counts.noc_hops,
            dep_hops: r.counts.dep_hops,
            noc_blocked: r.noc.blocked_cycles.total(),
            max_edge_skew: r.safety.max_edge_skew,
            energy: r.energy.total,
        }
    }
}

/// Run every point of the sweep. Rows come back in a fixed order whatever
/// the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, SimError> {
    spec.validate()?;
    // Each distinct workload is generated and checked against the reference once.
    let mut keys: Vec<(usize, u64)> = Vec::new();
    for i in 0..spec.axis.len() {
        for &s in &spec.seeds {
            keys.push((if matches!(spec.axis, Axis::Rate(_)) { i } else { 0 }, s));
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let nets: BTreeMap<(usize, u64), _> = keys
        .par_iter()
        .map(|&(i, seed)| {
            let mut cfg = spec.base.clone();
            let mut w = spec.workload.with_seed(seed);
            spec.axis.apply(i, &mut cfg, &mut w);
            let net = w.generate()?;
            let want = reference_run(&net)?;
            Ok(((i, seed), (net, want)))
        })
        .collect::<Result<_, SimError>>()?;
    spec.points()
        .par_iter()
        .map(|p| {
            let mut cfg = spec.base.clone();
            let mut w = spec.workload.clone();
            if let Some(mode) = p.mode {
                cfg.mode = mode;
            }
            spec.axis.apply(p.i, &mut cfg, &mut w);
            cfg.seed = spec.base.seed + u64::from(p.rep);
            let key = (if matches!(spec.axis, Axis::Rate(_)) { p.i } else { 0 }, p.seed);
            let (net, want) = &nets[&key];
            let r = compile_and_run(net, &cfg)?;
            let exact = r.raster == *want;
            Ok(ResultRow::new(&spec.axis, p.i, p.seed, p.rep, &r, exact))
        })
        .collect()
}

pub fn write_rows(rows: &[ResultRow]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn read_rows(bytes: &[u8]) -> Result<Vec<ResultRow>, csv::Error> {
    csv::Reader::from_reader(bytes).deserialize().collect()
}

/// Aggregate of one (axis value, mode) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub axis: String,
    pub value: String,
    pub mode: Mode,
    pub runs: u32,
    pub exact_runs: u32,
    pub mean_cycles: f64,
    /// Harmonic mean over seeds and repetitions of sync cycles / cycles;
    /// empty when the sweep has no matching sync run.
    pub speedup: Option<f64>,
    /// Harmonic mean of sync energy / energy.
    pub energy_efficiency: Option<f64>,
    pub busy_share: f64,
    pub wait_share: f64,
    pub rollback_share: f64,
}

pub fn harmonic_mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() || xs.iter().any(|&x| x <= 0.0) {
        return None;
    }
    Some(xs.len() as f64 / xs.iter().map(|x| 1.0 / x).sum::<f64>())
}

/// Summarise a results table. Speedups compare each run against the sync
/// run with the same value, seed and repetition; on a mode axis the sync
/// run of the same seed and repetition is used.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mode_axis = rows.first().is_some_and(|r| r.axis == "mode");
    let baseline = |r: &ResultRow| {
        rows.iter().find(|b| {
            b.mode == Mode::Sync && b.seed == r.seed && b.rep == r.rep && (mode_axis || b.value == r.value)
        })
    };
    // Preserve first-appearance order of values.
    let mut cells: Vec<((String, Mode), Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        let key = (r.value.clone(), r.mode);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => cells.push((key, vec![r])),
        }
    }
    cells
        .into_iter()
        .map(|((value, mode), group)| {
            let n = group.len() as f64;
            let core_cycles: f64 = group.iter().map(|r| (r.total_cycles * u64::from(r.cores)) as f64).sum();
            let share = |f: fn(&ResultRow) -> u64| {
                if core_cycles == 0.0 {
                    0.0
                } else {
                    group.iter().map(|r| f(r) as f64).sum::<f64>() / core_cycles
                }
            };
            let ratios = |f: fn(&ResultRow) -> u64| -> Option<f64> {
                let v: Option<Vec<f64>> =
                    group.iter().map(|r| baseline(r).map(|b| f(b) as f64 / f(r) as f64)).collect();
                harmonic_mean(&v?)
            };
            SummaryRow {
                axis: group[0].axis.clone(),
                value,
                mode,
                runs: group.len() as u32,
                exact_runs: group.iter().filter(|r| r.exact).count() as u32,
                mean_cycles: group.iter().map(|r| r.total_cycles as f64).sum::<f64>() / n,
                speedup: ratios(|r| r.total_cycles),
                energy_efficiency: ratios(|r| r.energy),
                busy_share: share(|r| r.busy_cycles),
                wait_share: share(|r| r.wait_cycles),
                rollback_share: share(|r| r.rollback_cycles),
            }
        })
        .collect()
}

pub fn write_summary(rows: &[SummaryRow]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}
