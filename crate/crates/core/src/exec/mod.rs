//! Multi-threaded executors: one OS thread per processing element.
//!
//! Each worker owns a contiguous block of grid points plus one ghost cell on
//! each side. Edge values are exchanged through [`Mailbox`] slots. In
//! [`ExecMode::Barriered`] mode every worker passes two barriers per step
//! (after reading its neighbours, after publishing its own edges), which makes
//! the result bit-identical to [`crate::sync_run`]. In
//! [`ExecMode::BarrierFree`] mode nobody waits: each worker reads whatever
//! its neighbours last published and carries on.

mod barrier;
mod mailbox;

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

pub use barrier::{Poisoned, SpinBarrier};
pub use mailbox::{Mailbox, Observed, TaggedMailbox};

use barrier::PoisonOnPanic;
use mailbox::Slot;

use crate::error::{contract, domain, HeatError, Result};
use crate::field::{BoundaryCondition, TemperatureField};
use crate::params::SolverParams;
use crate::partition::PartitionSpec;
use crate::stencil::{check_finite, update};

/// Steps between voluntary yields when workers outnumber cores.
pub const OVERSUBSCRIBED_YIELD_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExecMode {
    Barriered,
    BarrierFree,
}

impl ExecMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExecMode::Barriered => "barriered",
            ExecMode::BarrierFree => "barrier-free",
        }
    }
}

impl std::fmt::Display for ExecMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Logical CPUs visible to this process.
pub fn available_cores() -> usize {
    thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecConfig {
    workers: usize,
    k_end: usize,
    mode: ExecMode,
    yield_every: Option<NonZeroUsize>,
    instrument: bool,
    #[cfg(test)]
    fail_at: Option<(usize, usize)>,
}

impl ExecConfig {
    /// When `workers` exceeds the visible core count, workers yield every
    /// [`OVERSUBSCRIBED_YIELD_EVERY`] steps so that time-sliced threads still
    /// interleave. Override with [`ExecConfig::with_yield_every`].
    pub fn new(workers: usize, k_end: usize, mode: ExecMode) -> Result<Self> {
        if workers == 0 {
            return Err(domain("at least one worker is required"));
        }
        if k_end == 0 {
            return Err(domain("k_end must be at least 1"));
        }
        let yield_every = (workers > available_cores())
            .then(|| NonZeroUsize::new(OVERSUBSCRIBED_YIELD_EVERY).unwrap());
        Ok(Self {
            workers,
            k_end,
            mode,
            yield_every,
            instrument: false,
            #[cfg(test)]
            fail_at: None,
        })
    }

    pub fn with_yield_every(mut self, steps: Option<usize>) -> Self {
        self.yield_every = steps.and_then(NonZeroUsize::new);
        self
    }

    /// Tagged mailboxes: record generation lags and check for torn reads.
    pub fn with_instrumentation(mut self, on: bool) -> Self {
        self.instrument = on;
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn k_end(&self) -> usize {
        self.k_end
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    pub fn yield_every(&self) -> Option<usize> {
        self.yield_every.map(NonZeroUsize::get)
    }

    pub fn oversubscribed(&self) -> bool {
        self.workers > available_cores()
    }
}

/// Read statistics gathered by instrumented runs.
///
/// `writer_lag` counts, per read, how many generations the writer had
/// announced beyond the one observed (always `>= 0`). `reader_offset` is the
/// reader's step minus the observed generation: positive means stale,
/// negative means the neighbour had already run ahead.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LagReport {
    pub reads: u64,
    pub torn: u64,
    pub writer_lag: BTreeMap<i64, u64>,
    pub reader_offset: BTreeMap<i64, u64>,
}

impl LagReport {
    fn record(&mut self, observed: Observed, announced: u64, reader_step: u64) {
        self.reads += 1;
        if !observed.consistent {
            self.torn += 1;
        }
        *self
            .writer_lag
            .entry(announced as i64 - observed.generation as i64)
            .or_default() += 1;
        *self
            .reader_offset
            .entry(reader_step as i64 - observed.generation as i64)
            .or_default() += 1;
    }

    fn merge(&mut self, other: LagReport) {
        self.reads += other.reads;
        self.torn += other.torn;
        for (k, v) in other.writer_lag {
            *self.writer_lag.entry(k).or_default() += v;
        }
        for (k, v) in other.reader_offset {
            *self.reader_offset.entry(k).or_default() += v;
        }
    }

    pub fn min_writer_lag(&self) -> Option<i64> {
        self.writer_lag.keys().next().copied()
    }

    pub fn max_reader_offset(&self) -> Option<i64> {
        self.reader_offset.keys().next_back().copied()
    }

    pub fn mean_reader_offset(&self) -> f64 {
        let total: f64 = self.reader_offset.iter().map(|(k, v)| *k as f64 * *v as f64).sum();
        total / self.reads.max(1) as f64
    }
}

#[derive(Debug, Clone)]
pub struct ExecOutcome {
    pub field: TemperatureField,
    /// Completed steps per PE; every entry equals `k_end` on success.
    pub steps: Vec<usize>,
    /// Wall time from spawning the first worker to joining the last.
    pub elapsed: Duration,
    pub lag: Option<LagReport>,
}

type WorkerResult = Result<(usize, Option<LagReport>)>;

/// Runs `cfg.k_end()` steps with one thread per PE.
pub fn exec_run(
    u0: &TemperatureField,
    params: &SolverParams,
    bc: &BoundaryCondition,
    part: &PartitionSpec,
    cfg: &ExecConfig,
) -> Result<ExecOutcome> {
    if part.n_points() != u0.len() {
        return Err(contract(format!(
            "partition covers {} points, field has {}",
            part.n_points(),
            u0.len()
        )));
    }
    if part.pe_count() != cfg.workers {
        return Err(contract(format!(
            "partition has {} PEs but {} workers were requested",
            part.pe_count(),
            cfg.workers
        )));
    }
    bc.check_ends(u0.values())?;
    if cfg.instrument {
        run_with::<TaggedMailbox>(u0, params, bc, part, cfg)
    } else {
        run_with::<Mailbox>(u0, params, bc, part, cfg)
    }
}

struct Shared<'a, S> {
    first: &'a [S],
    last: &'a [S],
    announced: &'a [AtomicU64],
    barrier: Option<&'a SpinBarrier>,
    per_pe: usize,
    n_points: usize,
    pe_count: usize,
    r: f64,
    bc: BoundaryCondition,
    cfg: &'a ExecConfig,
}

#[derive(Clone, Copy)]
enum Ghost {
    Unused,
    /// Wrap-around within a single PE: copy local index.
    Local(usize),
    /// Read neighbour PE's edge slot.
    FirstOf(usize),
    LastOf(usize),
}

fn run_with<S: Slot>(
    u0: &TemperatureField,
    params: &SolverParams,
    bc: &BoundaryCondition,
    part: &PartitionSpec,
    cfg: &ExecConfig,
) -> Result<ExecOutcome> {
    let per_pe = part.per_pe();
    let pe_count = part.pe_count();
    let values = u0.values();
    let first: Vec<S> = (0..pe_count).map(|p| S::with_value(values[p * per_pe])).collect();
    // With one point per PE the first and last edge are the same scalar.
    let last_store: Vec<S> = if per_pe == 1 {
        Vec::new()
    } else {
        (0..pe_count).map(|p| S::with_value(values[(p + 1) * per_pe - 1])).collect()
    };
    let last: &[S] = if per_pe == 1 { &first } else { &last_store };
    let announced: Vec<AtomicU64> = (0..pe_count).map(|_| AtomicU64::new(0)).collect();
    let spin_limit = if cfg.oversubscribed() { 0 } else { 10_000 };
    let barrier = SpinBarrier::new(pe_count, spin_limit);
    let shared = Shared {
        first: &first,
        last,
        announced: &announced,
        barrier: (cfg.mode == ExecMode::Barriered).then_some(&barrier),
        per_pe,
        n_points: part.n_points(),
        pe_count,
        r: params.r(),
        bc: *bc,
        cfg,
    };

    let mut output = values.to_vec();
    let start = Instant::now();
    let results: Vec<thread::Result<WorkerResult>> =
        thread::scope(|scope| {
            let handles: Vec<_> = output
                .chunks_mut(per_pe)
                .enumerate()
                .map(|(pe, chunk)| {
                    let shared = &shared;
                    scope.spawn(move || worker(pe, shared, chunk))
                })
                .collect();
            handles.into_iter().map(|h| h.join()).collect()
        });
    let elapsed = start.elapsed();

    let mut steps = Vec::with_capacity(pe_count);
    let mut lag = cfg.instrument.then(LagReport::default);
    let mut failure: Option<HeatError> = None;
    for (pe, result) in results.into_iter().enumerate() {
        match result {
            Ok(Ok((done, report))) => {
                steps.push(done);
                if let (Some(total), Some(report)) = (lag.as_mut(), report) {
                    total.merge(report);
                }
            }
            Ok(Err(e)) => {
                // Errors caused by a poisoned barrier are secondary; keep the root cause.
                if failure.is_none() || !matches!(e, HeatError::Worker { .. }) {
                    failure.get_or_insert(e);
                }
            }
            Err(payload) => {
                let message = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "worker panicked".into());
                failure = Some(HeatError::Worker { worker: pe, message });
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if cfg!(debug_assertions) {
        check_finite(&output, cfg.k_end)?;
    }
    Ok(ExecOutcome {
        field: TemperatureField::from_vec_unchecked(output),
        steps,
        elapsed,
        lag,
    })
}

fn worker<S: Slot>(
    pe: usize,
    sh: &Shared<'_, S>,
    out: &mut [f64],
) -> Result<(usize, Option<LagReport>)> {
    let _guard = PoisonOnPanic(sh.barrier);
    let n = sh.per_pe;
    let global_first = pe * n;
    let periodic = sh.bc.is_periodic();

    let left = if pe > 0 {
        Ghost::LastOf(pe - 1)
    } else if periodic && sh.pe_count > 1 {
        Ghost::LastOf(sh.pe_count - 1)
    } else if periodic {
        Ghost::Local(n)
    } else {
        Ghost::Unused
    };
    let right = if pe + 1 < sh.pe_count {
        Ghost::FirstOf(pe + 1)
    } else if periodic && sh.pe_count > 1 {
        Ghost::FirstOf(0)
    } else if periodic {
        Ghost::Local(1)
    } else {
        Ghost::Unused
    };
    // Local indices (1-based, inside the ghost frame) of pinned points.
    let pinned: Vec<(usize, f64)> = match sh.bc {
        BoundaryCondition::Dirichlet { c1, c2 } => {
            let mut v = Vec::new();
            if global_first == 0 {
                v.push((1, c1));
            }
            if global_first + n == sh.n_points {
                v.push((n, c2));
            }
            v
        }
        BoundaryCondition::Periodic => Vec::new(),
    };

    let mut cur = vec![0.0; n + 2];
    cur[1..=n].copy_from_slice(out);
    let mut next = cur.clone();
    let mut report = sh.cfg.instrument.then(LagReport::default);
    let yield_every = sh.cfg.yield_every.map_or(usize::MAX, NonZeroUsize::get);
    let wait = |b: Option<&SpinBarrier>| -> Result<()> {
        match b {
            Some(b) => b.wait().map_err(|Poisoned| HeatError::Worker {
                worker: pe,
                message: "aborted because a peer worker failed".into(),
            }),
            None => Ok(()),
        }
    };

    for k in 0..sh.cfg.k_end {
        #[cfg(test)]
        if sh.cfg.fail_at == Some((pe, k)) {
            panic!("injected failure in worker {pe} at step {k}");
        }
        for (ghost, slot) in [(left, 0), (right, n + 1)] {
            cur[slot] = match ghost {
                Ghost::Unused => continue,
                Ghost::Local(j) => cur[j],
                Ghost::FirstOf(p) | Ghost::LastOf(p) => {
                    let mailbox = match ghost {
                        Ghost::FirstOf(_) => &sh.first[p],
                        _ => &sh.last[p],
                    };
                    let observed = mailbox.observe();
                    if let Some(rep) = report.as_mut() {
                        let announced = sh.announced[p].load(Ordering::Acquire);
                        rep.record(observed, announced, k as u64);
                    }
                    observed.value
                }
            };
        }
        for j in 1..=n {
            next[j] = update(cur[j - 1], cur[j], cur[j + 1], sh.r);
        }
        for &(j, c) in &pinned {
            next[j] = c;
        }
        wait(sh.barrier)?;
        let generation = k as u64 + 1;
        if sh.cfg.instrument {
            // Announce before publishing so readers never see a generation
            // newer than the announced one.
            sh.announced[pe].store(generation, Ordering::Release);
        }
        sh.first[pe].publish(next[1], generation);
        if n > 1 {
            sh.last[pe].publish(next[n], generation);
        }
        wait(sh.barrier)?;
        std::mem::swap(&mut cur, &mut next);
        if (k + 1) % yield_every == 0 {
            thread::yield_now();
        }
    }
    out.copy_from_slice(&cur[1..=n]);
    Ok((sh.cfg.k_end, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{cosine_init, linear_steady_state};
    use crate::sync::{sync_run, Stride};

    const HOT_COLD: BoundaryCondition = BoundaryCondition::Dirichlet { c1: 1.0, c2: 0.0 };

    fn section5() -> (TemperatureField, SolverParams) {
        let u0 = HOT_COLD.impose(&cosine_init(100).unwrap()).unwrap();
        (u0, SolverParams::new(0.5, 0.01, 0.1).unwrap())
    }

    fn reference(u0: &TemperatureField, p: &SolverParams, bc: &BoundaryCondition, k: usize) -> TemperatureField {
        sync_run(u0, p, bc, k, Stride::every(k).unwrap()).unwrap().final_field().clone()
    }

    #[test]
    fn config_validation() {
        assert!(ExecConfig::new(0, 10, ExecMode::Barriered).is_err());
        assert!(ExecConfig::new(1, 0, ExecMode::Barriered).is_err());
        let (u0, p) = section5();
        let cfg = ExecConfig::new(3, 10, ExecMode::Barriered).unwrap();
        let part = PartitionSpec::with_pe_count(100, 4).unwrap();
        assert!(matches!(exec_run(&u0, &p, &HOT_COLD, &part, &cfg), Err(HeatError::Contract(_))));
    }

    #[test]
    fn barriered_matches_sync() {
        let (u0, p) = section5();
        for bc in [HOT_COLD, BoundaryCondition::Periodic] {
            let u0 = bc.impose(&u0).unwrap();
            let expected = reference(&u0, &p, &bc, 257);
            for workers in [1, 2, 4, 5, 10] {
                let part = PartitionSpec::with_pe_count(100, workers).unwrap();
                let cfg = ExecConfig::new(workers, 257, ExecMode::Barriered).unwrap();
                let out = exec_run(&u0, &p, &bc, &part, &cfg).unwrap();
                assert_eq!(out.field, expected, "{workers} workers, {bc:?}");
                assert_eq!(out.steps, vec![257; workers]);
            }
        }
    }

    #[test]
    fn barrier_free_single_worker_matches_sync() {
        let (u0, p) = section5();
        for bc in [HOT_COLD, BoundaryCondition::Periodic] {
            let u0 = bc.impose(&u0).unwrap();
            let part = PartitionSpec::single(100).unwrap();
            let cfg = ExecConfig::new(1, 1000, ExecMode::BarrierFree).unwrap();
            let out = exec_run(&u0, &p, &bc, &part, &cfg).unwrap();
            assert_eq!(out.field, reference(&u0, &p, &bc, 1000));
        }
    }

    #[test]
    fn barrier_free_stays_bounded_and_converges() {
        let (u0, p) = section5();
        let part = PartitionSpec::with_pe_count(100, 4).unwrap();
        let cfg = ExecConfig::new(4, 200_000, ExecMode::BarrierFree).unwrap();
        let out = exec_run(&u0, &p, &HOT_COLD, &part, &cfg).unwrap();
        let (lo, hi) = out.field.min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
        assert_eq!(out.steps, vec![200_000; 4]);
        let target = linear_steady_state(100, 1.0, 0.0).unwrap();
        assert!(out.field.max_abs_diff(&target) <= 1e-3);
    }

    #[test]
    fn instrumented_barriered_reads_are_fresh() {
        let (u0, p) = section5();
        let part = PartitionSpec::with_pe_count(100, 4).unwrap();
        let cfg = ExecConfig::new(4, 500, ExecMode::Barriered).unwrap().with_instrumentation(true);
        let out = exec_run(&u0, &p, &HOT_COLD, &part, &cfg).unwrap();
        let lag = out.lag.unwrap();
        // Inner PEs read two ghosts per step, outer PEs one.
        assert_eq!(lag.reads, 500 * 6);
        assert_eq!(lag.torn, 0);
        assert_eq!(lag.reader_offset.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(lag.min_writer_lag(), Some(0));
        assert_eq!(out.field, reference(&u0, &p, &HOT_COLD, 500));
    }

    #[test]
    fn instrumented_barrier_free_lags_are_consistent() {
        let (u0, p) = section5();
        let part = PartitionSpec::pointwise(100).unwrap();
        let u0 = BoundaryCondition::Periodic.impose(&u0).unwrap();
        let cfg = ExecConfig::new(100, 2000, ExecMode::BarrierFree).unwrap().with_instrumentation(true);
        let out = exec_run(&u0, &p, &BoundaryCondition::Periodic, &part, &cfg).unwrap();
        let lag = out.lag.unwrap();
        assert_eq!(lag.reads, 100 * 2 * 2000);
        assert_eq!(lag.torn, 0);
        assert!(lag.min_writer_lag().unwrap() >= 0);
    }

    #[test]
    fn worker_failure_aborts_run() {
        let (u0, p) = section5();
        let part = PartitionSpec::with_pe_count(100, 4).unwrap();
        for mode in [ExecMode::Barriered, ExecMode::BarrierFree] {
            let mut cfg = ExecConfig::new(4, 1000, mode).unwrap();
            cfg.fail_at = Some((2, 10));
            match exec_run(&u0, &p, &HOT_COLD, &part, &cfg) {
                Err(HeatError::Worker { worker, message }) => {
                    assert_eq!(worker, 2);
                    assert!(message.contains("injected failure"), "{message}");
                }
                other => panic!("expected worker failure, got {other:?}"),
            }
        }
    }
}
