//! `depasync`: generate workloads, compile them, run and verify
//! simulations, sweep parameters and summarise results.

mod exit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use depasync::engine::BarrierKind;
use depasync::experiment::{read_rows, run_experiment, summarize, write_rows, write_summary, Axis, ExperimentSpec};
use depasync::io::write_atomic;
use depasync::metrics::{export_report, export_trace, import_report};
use depasync::model::{LayeredSpec, RateKnobs, RotatingBurstSpec, Spike, SyntheticSpec, WorkloadSpec};
use depasync::noc::Grid;
use depasync::{compile, compile_and_run, reference_run, Mode, Network, Program, SimConfig, SimReport, SpikeRaster};
use exit::{Failure, Kind};

#[derive(Parser, Debug)]
#[command(name = "depasync", version, about = "Many-core neuromorphic accelerator simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a workload and write it as JSON.
    Gen(GenArgs),
    /// Partition and place a workload; write the compiled program.
    Compile(CompileArgs),
    /// Run one simulation and write its report.
    Run(RunArgs),
    /// Check every mode against the reference interpreter.
    Verify(VerifyArgs),
    /// Run a parameter sweep and write one CSV row per simulation.
    Sweep(SweepArgs),
    /// Summarise sweep results or a single report as CSV.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct WorkloadArgs {
    /// Network JSON file, workload spec TOML file, or one of
    /// `synthetic`, `layered`, `burst`.
    #[arg(long, env = "DEPASYNC_WORKLOAD")]
    workload: String,
    /// Generator seed; ignored for network files.
    #[arg(long, env = "DEPASYNC_SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
struct SimArgs {
    /// SimConfig TOML file; flags below override it.
    #[arg(long, env = "DEPASYNC_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "DEPASYNC_MODE")]
    mode: Option<Mode>,
    /// Spike-buffer window in timesteps.
    #[arg(long, env = "DEPASYNC_M")]
    m: Option<u32>,
    /// Virtual channels per port.
    #[arg(long, env = "DEPASYNC_VC")]
    vc: Option<u8>,
    /// Mesh size, `WxH`.
    #[arg(long, env = "DEPASYNC_GRID")]
    grid: Option<Grid>,
    /// Barrier implementation for sync and se: `tree` or `ideal`.
    #[arg(long, env = "DEPASYNC_BARRIER")]
    barrier: Option<BarrierKind>,
}

impl SimArgs {
    fn config(&self) -> Result<SimConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::load(p)?,
            None => SimConfig::default(),
        };
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.vc {
            cfg.n_vc = v;
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.barrier {
            cfg.barrier = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Firing-rate dial in [0, 1] for synthetic workloads.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Previously compiled program; compiled on the fly when absent.
    #[arg(long)]
    program: Option<PathBuf>,
    #[command(flatten)]
    sim: SimArgs,
    /// Report JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-core timeline as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Seeds to verify, e.g. `0..20` or `1,4,9`; overrides --seed.
    #[arg(long)]
    seeds: Option<String>,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Experiment spec TOML; otherwise built from the flags below.
    #[arg(long, conflicts_with_all = ["workload", "axis"])]
    experiment: Option<PathBuf>,
    /// Workload spec TOML or a generator name.
    #[arg(long, env = "DEPASYNC_WORKLOAD")]
    workload: Option<String>,
    /// `key=v1,v2,...` with key one of m, rate, vc, grid, mode, mapping, cyclic.
    #[arg(long)]
    axis: Option<Axis>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long)]
    seeds: Option<String>,
    /// Restrict the modes run at each point, comma separated.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    #[command(flatten)]
    sim: SimArgs,
    /// Results CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Sweep results CSV, or a single run's report JSON.
    #[arg(long)]
    results: PathBuf,
    /// Summary CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEPASYNC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(Failure::new(Kind::Usage, first));
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(&a),
        Cmd::Compile(a) => cmd_compile(&a),
        Cmd::Run(a) => cmd_run(&a),
        Cmd::Verify(a) => cmd_verify(&a),
        Cmd::Sweep(a) => cmd_sweep(&a),
        Cmd::Report(a) => cmd_report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{f}");
    ExitCode::from(f.kind as u8)
}

fn builtin(name: &str) -> Option<WorkloadSpec> {
    match name {
        "synthetic" => Some(WorkloadSpec::Synthetic(SyntheticSpec::default())),
        "layered" => Some(WorkloadSpec::Layered(LayeredSpec::default())),
        "burst" => Some(WorkloadSpec::RotatingBurst(RotatingBurstSpec::default())),
        _ => None,
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(Kind::Io, format!("{}: {e}", path.display())))
}

/// A generator description, if `arg` names one.
fn workload_spec(arg: &str) -> Result<Option<WorkloadSpec>, Failure> {
    if let Some(spec) = builtin(arg) {
        return Ok(Some(spec));
    }
    if Path::new(arg).extension().is_some_and(|e| e == "toml") {
        let text = read_text(Path::new(arg))?;
        let spec = toml::from_str(&text).map_err(|e| Failure::new(Kind::Workload, format!("{arg}: {}", e.message())))?;
        return Ok(Some(spec));
    }
    Ok(None)
}

fn load_network(w: &WorkloadArgs) -> Result<Network, Failure> {
    match workload_spec(&w.workload)? {
        Some(spec) => {
            let spec = match w.seed {
                Some(s) => spec.with_seed(s),
                None => spec,
            };
            Ok(spec.generate()?)
        }
        None => Ok(Network::load(Path::new(&w.workload))?),
    }
}

/// `0..20`, `1,4,9` or a mix such as `1,5..8`.
fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::new(Kind::Usage, format!("bad seed list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                out.extend(a..b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let mut spec = workload_spec(&a.workload.workload)?
        .ok_or_else(|| Failure::new(Kind::Usage, format!("{} is not a generator name or spec file", a.workload.workload)))?;
    if let Some(s) = a.workload.seed {
        spec = spec.with_seed(s);
    }
    if let Some(level) = a.rate {
        if !(0.0..=1.0).contains(&level) {
            return Err(Failure::new(Kind::Usage, "--rate must lie in [0, 1]"));
        }
        match &mut spec {
            WorkloadSpec::Synthetic(s) => s.rate = RateKnobs::level(level),
            _ => return Err(Failure::new(Kind::Usage, "--rate applies to synthetic workloads only")),
        }
    }
    let net = spec.generate()?;
    net.save(&a.out)?;
    println!("neurons={} synapses={} t_max={} out={}", net.n_neurons(), net.synapses.len(), net.t_max, a.out.display());
    Ok(())
}

fn cmd_compile(a: &CompileArgs) -> Result<(), Failure> {
    let net = load_network(&a.workload)?;
    let cfg = a.sim.config()?;
    let program = compile(&net, &cfg.compile_options())?;
    program.save(&a.out)?;
    println!(
        "cores={} acyclic={} avg_dep_distance={:.3} out={}",
        program.n_cores(),
        program.dep_graph.is_acyclic(),
        program.avg_dep_distance(),
        a.out.display()
    );
    Ok(())
}

fn summary_line(r: &SimReport) -> String {
    format!(
        "mode={} cycles={} spikes={} energy={} rollback_share={:.4}",
        r.mode,
        r.total_cycles,
        r.raster.len(),
        r.energy.total,
        r.rollback_share()
    )
}

fn cmd_run(a: &RunArgs) -> Result<(), Failure> {
    let net = load_network(&a.workload)?;
    let mut cfg = a.sim.config()?;
    cfg.trace |= a.trace.is_some();
    let report = match &a.program {
        Some(p) => depasync::run(&net, &Program::load(p)?, &cfg)?,
        None => compile_and_run(&net, &cfg)?,
    };
    if let Some(path) = &a.out {
        export_report(&report, path)?;
    }
    if let Some(path) = &a.trace {
        export_trace(&report.trace, path)?;
    }
    println!("{}", summary_line(&report));
    Ok(())
}

fn divergence(mode: Mode, got: &SpikeRaster, want: &SpikeRaster) -> Option<String> {
    got.first_divergence(want).map(|Spike { t, neuron }| {
        let side = if got.contains(neuron, t) { "extra" } else { "missing" };
        format!("{mode} diverges from reference at neuron={neuron} timestep={t} ({side} spike)")
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let base = a.sim.config()?;
    let seeds: Vec<Option<u64>> = match &a.seeds {
        Some(s) => parse_seeds(s)?.into_iter().map(Some).collect(),
        None => vec![a.workload.seed],
    };
    for seed in seeds {
        let net = load_network(&WorkloadArgs { workload: a.workload.workload.clone(), seed })?;
        let want = reference_run(&net)?;
        for mode in Mode::ALL {
            let r = compile_and_run(&net, &SimConfig { mode, ..base.clone() })?;
            let tag = seed.map_or(String::new(), |s| format!("seed={s} "));
            if let Some(msg) = divergence(mode, &r.raster, &want) {
                return Err(Failure::new(Kind::Mismatch, format!("{tag}{msg}")));
            }
            println!("ok {tag}mode={mode} spikes={} cycles={}", r.raster.len(), r.total_cycles);
        }
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let mut spec = match &a.experiment {
        Some(path) => ExperimentSpec::from_toml(&read_text(path)?)?,
        None => {
            let w = a.workload.as_deref().ok_or_else(|| Failure::new(Kind::Usage, "sweep needs --experiment or --workload"))?;
            let workload = workload_spec(w)?
                .ok_or_else(|| Failure::new(Kind::Usage, format!("{w} is not a generator name or spec file")))?;
            let axis = a.axis.clone().ok_or_else(|| Failure::new(Kind::Usage, "sweep needs --axis"))?;
            ExperimentSpec::new(SimConfig::default(), workload, axis)
        }
    };
    if a.sim.config.is_some() {
        spec.base = a.sim.config()?;
    } else {
        let sim = SimArgs { config: None, ..a.sim.clone() };
        let defaults = sim.config()?;
        // Only explicitly given flags override a spec file's base config.
        if sim.mode.is_some() {
            spec.base.mode = defaults.mode;
        }
        if sim.m.is_some() {
            spec.base.m = defaults.m;
        }
        if sim.vc.is_some() {
            spec.base.n_vc = defaults.n_vc;
        }
        if sim.grid.is_some() {
            spec.base.grid = defaults.grid;
        }
        if sim.barrier.is_some() {
            spec.base.barrier = defaults.barrier;
        }
    }
    if let Some(r) = a.reps {
        spec.reps = r;
    }
    if let Some(s) = &a.seeds {
        spec.seeds = parse_seeds(s)?;
    }
    if let Some(m) = &a.modes {
        spec.modes = m.clone();
    }
    let rows = run_experiment(&spec)?;
    let bytes = write_rows(&rows).map_err(|e| Failure::new(Kind::Io, e.to_string()))?;
    write_atomic(&a.out, &bytes)?;
    let inexact = rows.iter().filter(|r| !r.exact).count();
    println!("rows={} inexact={inexact} out={}", rows.len(), a.out.display());
    if inexact > 0 {
        return Err(Failure::new(Kind::Mismatch, format!("{inexact} runs diverged from the reference")));
    }
    Ok(())
}

/// Per-core cycle breakdown of a single report.
fn core_breakdown(r: &SimReport) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["core", "busy", "wait", "rollback", "busy_share", "wait_share", "rollback_share"])?;
    let total = r.total_cycles.max(1) as f64;
    for c in &r.cores {
        w.write_record([
            c.id.to_string(),
            c.busy.to_string(),
            c.wait.to_string(),
            c.rollback.to_string(),
            format!("{:.4}", c.busy as f64 / total),
            format!("{:.4}", c.wait as f64 / total),
            format!("{:.4}", c.rollback as f64 / total),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn cmd_report(a: &ReportArgs) -> Result<(), Failure> {
    let csv_err = |e: csv::Error| Failure::new(Kind::Io, format!("{}: {e}", a.results.display()));
    let bytes = if a.results.extension().is_some_and(|e| e == "json") {
        let r = import_report(&a.results).map_err(|e| Failure::new(Kind::Io, format!("{}: {e}", a.results.display())))?;
        core_breakdown(&r).map_err(csv_err)?
    } else {
        let raw = std::fs::read(&a.results).map_err(|e| Failure::new(Kind::Io, format!("{}: {e}", a.results.display())))?;
        let rows = read_rows(&raw).map_err(csv_err)?;
        if rows.is_empty() {
            return Err(Failure::new(Kind::Io, format!("{}: no result rows", a.results.display())));
        }
        write_summary(&summarize(&rows)).map_err(csv_err)?
    };
    match &a.out {
        Some(p) => write_atomic(p, &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("1,5..7, 9").unwrap(), vec![1, 5, 6, 9]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("a..b").is_err());
    }

    #[test]
    fn divergence_names_first_pair() {
        let want = SpikeRaster::from_spikes(vec![Spike { t: 1, neuron: 3 }, Spike { t: 2, neuron: 0 }]);
        let got = SpikeRaster::from_spikes(vec![Spike { t: 1, neuron: 3 }, Spike { t: 2, neuron: 5 }]);
        let msg = divergence(Mode::Se, &got, &want).unwrap();
        assert!(msg.contains("neuron=0 timestep=2 (missing spike)"), "{msg}");
        assert_eq!(divergence(Mode::Se, &want, &want), None);
    }

    #[test]
    fn failure_line_is_single_line() {
        let f = Failure::new(Kind::Config, "a\nb");
        assert_eq!(f.to_string(), "error: kind=config code=6 msg=a b");
    }
}
