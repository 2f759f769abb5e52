//! Wall-clock comparison of the barriered and barrier-free executors over a
//! range of grid sizes.

use crate::error::{domain, Result};
use crate::exec::{available_cores, exec_run, ExecConfig, ExecMode};
use crate::field::{cosine_init, BoundaryCondition};
use crate::params::SolverParams;
use crate::partition::PartitionSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub modes: Vec<ExecMode>,
    pub reps: usize,
    pub k_end: usize,
    /// Upper bound on workers per run; defaults to the visible core count.
    pub max_workers: Option<usize>,
    pub params: SolverParams,
    pub bc: BoundaryCondition,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, modes: Vec<ExecMode>, reps: usize, k_end: usize) -> Result<Self> {
        Ok(Self {
            sizes,
            modes,
            reps,
            k_end,
            max_workers: None,
            params: SolverParams::new(0.5, 0.01, 0.1)?,
            bc: BoundaryCondition::Dirichlet { c1: 1.0, c2: 0.0 },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingRow {
    pub n_points: usize,
    pub mode: ExecMode,
    pub workers: usize,
    pub reps: usize,
    pub median_ns: u64,
    pub min_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    pub k_end: usize,
    pub cores: usize,
    /// True if any run used more workers than visible cores.
    pub oversubscribed: bool,
}

impl TimingTable {
    pub fn row(&self, n_points: usize, mode: ExecMode) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.n_points == n_points && r.mode == mode)
    }

    /// Barriered median over barrier-free median, per grid size measured in both modes.
    pub fn speedups(&self) -> Vec<(usize, f64)> {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.n_points).collect();
        sizes.dedup();
        sizes
            .into_iter()
            .filter_map(|n| {
                let b = self.row(n, ExecMode::Barriered)?;
                let f = self.row(n, ExecMode::BarrierFree)?;
                Some((n, b.median_ns as f64 / f.median_ns.max(1) as f64))
            })
            .collect()
    }

    /// Medians never decrease with grid size, for each mode.
    pub fn is_monotone(&self, mode: ExecMode) -> bool {
        let medians: Vec<u64> = self
            .rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.median_ns)
            .collect();
        medians.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Largest divisor of `n_points` not exceeding `cap` (at least 1).
pub fn workers_for(n_points: usize, cap: usize) -> usize {
    (1..=cap.max(1).min(n_points))
        .rev()
        .find(|p| n_points.is_multiple_of(*p))
        .unwrap_or(1)
}

pub fn median(sorted: &[u64]) -> u64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

/// Times every (size, mode) pair `reps` times after one untimed warm-up run.
/// Rows come out sorted by size, then in the order of `cfg.modes`.
pub fn measure(cfg: &BenchConfig) -> Result<TimingTable> {
    if cfg.reps < 3 {
        return Err(domain(format!("at least 3 repetitions are required, got {}", cfg.reps)));
    }
    if cfg.modes.is_empty() || cfg.sizes.is_empty() {
        return Err(domain("benchmark grid is empty"));
    }
    let cores = available_cores();
    let cap = cfg.max_workers.unwrap_or(cores);
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();

    let mut rows = Vec::new();
    let mut oversubscribed = false;
    for &n in &sizes {
        let u0 = cfg.bc.impose(&cosine_init(n)?)?;
        let workers = workers_for(n, cap);
        let part = PartitionSpec::with_pe_count(n, workers)?;
        for &mode in &cfg.modes {
            let exec = ExecConfig::new(workers, cfg.k_end, mode)?;
            oversubscribed |= exec.oversubscribed();
            exec_run(&u0, &cfg.params, &cfg.bc, &part, &exec)?;
            let mut times = (0..cfg.reps)
                .map(|_| {
                    exec_run(&u0, &cfg.params, &cfg.bc, &part, &exec)
                        .map(|o| o.elapsed.as_nanos() as u64)
                })
                .collect::<Result<Vec<u64>>>()?;
            times.sort_unstable();
            rows.push(TimingRow {
                n_points: n,
                mode,
                workers,
                reps: cfg.reps,
                median_ns: median(&times),
                min_ns: times[0],
            });
        }
    }
    Ok(TimingTable { rows, k_end: cfg.k_end, cores, oversubscribed })
}
