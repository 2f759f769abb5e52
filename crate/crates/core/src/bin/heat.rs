//! `heat run|ensemble|bench|steady`
//!
//! Exit codes: 0 success, 1 worker failure, 2 configuration error,
//! 3 I/O error, 4 non-finite values detected.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use async_heat::analysis::{ensemble_run, terminal_spread, EnsembleConfig};
use async_heat::bench::{measure, BenchConfig};
use async_heat::exec::{exec_run, ExecConfig, ExecMode};
use async_heat::field::{l2_norm, linear_steady_state, total_heat, BoundaryCondition, TemperatureField};
use async_heat::io::config::load_config;
use async_heat::io::csv::format_f64;
use async_heat::io::{
    emit_bench_csv, emit_ensemble_csv, emit_svg_lines, emit_trajectory_csv, ChartOptions,
    ConfigError, Mode, Precision, RunConfig, Series,
};
use async_heat::sync::{sync_run, sync_run_single_precision, Trajectory};
use async_heat::{async_run, HeatError};

#[derive(Parser)]
#[command(name = "heat", version, about = "Synchronous and asynchronous 1D heat equation solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write trajectory.csv.
    Run(Common),
    /// Run a seeded ensemble of asynchronous simulations.
    Ensemble(Common),
    /// Time the barriered and barrier-free executors.
    Bench(Common),
    /// Print the steady state for the configured boundary condition.
    Steady(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides the `out` key).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Io(String),
    Diverged(String),
    Worker(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Worker(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Diverged(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Diverged(m) | Failure::Worker(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<HeatError> for Failure {
    fn from(e: HeatError) -> Self {
        match e {
            HeatError::Diverged { .. } => Failure::Diverged(e.to_string()),
            HeatError::Worker { .. } => Failure::Worker(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn ensure_finite(label: &str, values: &[f64]) -> Result<(), Failure> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Failure::Diverged(format!("{label}: non-finite value at point {i}"))),
        None => Ok(()),
    }
}

fn prepare(common: &Common) -> Result<RunConfig, Failure> {
    let env_seed = std::env::var("HEAT_SEED").ok();
    let mut cfg = load_config(common.config.as_deref(), env_seed.as_deref(), &common.set)?;
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    Ok(&cfg.out)
}

fn steady_state(cfg: &RunConfig, u0: &TemperatureField) -> Result<TemperatureField, Failure> {
    Ok(match cfg.bc {
        BoundaryCondition::Dirichlet { c1, c2 } => linear_steady_state(cfg.n_points, c1, c2)?,
        BoundaryCondition::Periodic => TemperatureField::constant(cfg.n_points, u0.mean())?,
    })
}

fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let u0 = cfg.initial_field()?;
    let part = cfg.partition();
    let traj: Trajectory = match (cfg.mode, cfg.precision) {
        (Mode::Sync, Precision::Double) => sync_run(&u0, &cfg.params, &cfg.bc, cfg.k_end, cfg.stride)?,
        (Mode::Sync, Precision::Single) => {
            sync_run_single_precision(&u0, &cfg.params, &cfg.bc, cfg.k_end, cfg.stride)?
        }
        (_, Precision::Single) => {
            return Err(Failure::Config("invalid value for `precision`: single precision is only available in sync mode".into()));
        }
        (Mode::AsyncSim, _) => async_run(&u0, &cfg.params, &cfg.bc, &part, &cfg.model, cfg.k_end, cfg.stride)?,
        (Mode::ExecBarriered | Mode::ExecFree, _) => {
            let mode = cfg.mode.exec_mode().expect("executor mode");
            let exec = ExecConfig::new(cfg.workers, cfg.k_end.max(1), mode)?;
            if exec.oversubscribed() {
                eprintln!(
                    "note: {} workers exceed the available cores; workers yield every {} steps",
                    cfg.workers,
                    exec.yield_every().unwrap_or(0)
                );
            }
            let outcome = exec_run(&u0, &cfg.params, &cfg.bc, &part, &exec)?;
            println!("wall time: {:.3} ms", outcome.elapsed.as_secs_f64() * 1e3);
            Trajectory::from_parts(
                cfg.params,
                cfg.bc,
                vec![0, cfg.k_end.max(1)],
                vec![u0.clone(), outcome.field],
            )?
        }
    };
    for (k, snap) in traj.iter() {
        ensure_finite(&format!("step {k}"), snap.values())?;
    }
    let dir = out_dir(cfg)?;
    let path = dir.join("trajectory.csv");
    emit_trajectory_csv(&traj, &path).map_err(io_err(&path))?;

    let last = traj.final_field();
    let reference = steady_state(cfg, &u0)?;
    println!("mode: {}", cfg.mode.as_str());
    println!("N = {}, n = {}, r = {}", cfg.n_points, cfg.per_pe, cfg.params.r());
    println!("steps: {}", traj.k_end());
    println!("final 2-norm: {}", format_f64(l2_norm(last)));
    println!("final total heat: {}", format_f64(total_heat(last)));
    println!("max |u - steady|: {}", format_f64(last.max_abs_diff(&reference)));
    println!("wrote {}", path.display());
    Ok(())
}

fn ensemble(cfg: &RunConfig) -> Result<(), Failure> {
    let u0 = cfg.initial_field()?;
    let config = EnsembleConfig {
        u0: u0.clone(),
        params: cfg.params,
        bc: cfg.bc,
        part: cfg.partition(),
        model: cfg.model,
        k_end: cfg.k_end,
        stride: cfg.stride,
    };
    let res = ensemble_run(&config, cfg.runs, cfg.model.seed())?;
    for run in &res.runs {
        ensure_finite(&format!("seed {}", run.seed), run.terminal.values())?;
    }
    let dir = out_dir(cfg)?;
    let runs_path = dir.join("ensemble_runs.csv");
    let stats_path = dir.join("ensemble_stats.csv");
    emit_ensemble_csv(&res, &runs_path, &stats_path).map_err(io_err(&runs_path))?;

    let steps: Vec<f64> = res.steps.iter().map(|&k| k as f64).collect();
    let mut series: Vec<Series> = res
        .runs
        .iter()
        .map(|run| {
            Series::new(format!("seed {}", run.seed), steps.iter().copied().zip(run.norms.iter().copied()).collect())
                .with_color("#2ca02c")
                .with_width(0.6)
        })
        .collect();
    series.push(
        Series::new("mean", steps.iter().copied().zip(res.mean.iter().copied()).collect())
            .with_color("#d62728")
            .with_width(1.5),
    );
    let bc = if cfg.bc.is_periodic() { "periodic" } else { "Dirichlet" };
    let opts = ChartOptions {
        title: format!("{} asynchronous runs, {bc}, q = {}", res.len(), cfg.model.q()),
        ..ChartOptions::default()
    };
    let svg_path = dir.join("ensemble.svg");
    emit_svg_lines(&series, &opts, &svg_path).map_err(io_err(&svg_path))?;

    println!("runs: {} (seeds {}..={})", res.len(), res.runs[0].seed, res.runs[res.len() - 1].seed);
    println!("final mean 2-norm: {}", format_f64(*res.mean.last().unwrap()));
    if res.len() >= 2 {
        let spread = terminal_spread(&res)?;
        println!("terminal spread (std of mean temperature): {}", format_f64(spread.mean_temperature));
        println!("terminal spread (std of 2-norm): {}", format_f64(spread.norm2));
    }
    println!("wrote {}, {}, {}", runs_path.display(), stats_path.display(), svg_path.display());
    Ok(())
}

fn bench(cfg: &RunConfig) -> Result<(), Failure> {
    let mut bench = BenchConfig::new(
        cfg.bench_sizes.clone(),
        vec![ExecMode::Barriered, ExecMode::BarrierFree],
        cfg.bench_reps,
        cfg.bench_steps,
    )?;
    bench.params = cfg.params;
    bench.bc = cfg.bc;
    let table = measure(&bench)?;
    let dir = out_dir(cfg)?;
    let path = dir.join("bench.csv");
    emit_bench_csv(&table, &path).map_err(io_err(&path))?;

    println!("{} steps per run, {} cores visible", table.k_end, table.cores);
    if table.oversubscribed {
        println!("warning: some runs used more workers than cores; timings are distorted");
    }
    println!("{:>8} {:>13} {:>8} {:>14} {:>14}", "N", "mode", "workers", "median_ns", "min_ns");
    for row in &table.rows {
        println!(
            "{:>8} {:>13} {:>8} {:>14} {:>14}",
            row.n_points, row.mode, row.workers, row.median_ns, row.min_ns
        );
    }
    for (n, ratio) in table.speedups() {
        println!("N = {n}: barriered / barrier-free = {ratio:.3}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn steady(cfg: &RunConfig) -> Result<(), Failure> {
    let u0 = cfg.initial_field()?;
    for v in steady_state(cfg, &u0)?.values() {
        println!("{}", format_f64(*v));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => prepare(c).and_then(|cfg| run(&cfg)),
        Command::Ensemble(c) => prepare(c).and_then(|cfg| ensemble(&cfg)),
        Command::Bench(c) => prepare(c).and_then(|cfg| bench(&cfg)),
        Command::Steady(c) => prepare(c).and_then(|cfg| steady(&cfg)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("heat: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
