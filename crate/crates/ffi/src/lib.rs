//! C ABI for the `async-heat` solvers.
//!
//! Every function returns a [`HeatStatus`]; on failure a description is kept
//! per thread and can be copied out with [`heat_last_error`]. Long-lived state
//! lives behind opaque handles ([`HeatSimulation`], [`HeatEnsemble`]) that the
//! caller releases with the matching `*_free` function. Arrays are passed as
//! pointer plus length; output arrays must hold at least the stated count.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use async_heat::analysis::{ensemble_run, terminal_spread, EnsembleConfig, EnsembleResult};
use async_heat::exec::{exec_run, ExecConfig, ExecMode};
use async_heat::field::{cosine_init, l2_norm, linear_steady_state, total_heat};
use async_heat::sync::Stride;
use async_heat::{
    AsyncSimulator, BoundaryCondition, DelayLaw, DelayModel, HeatError, PartitionSpec,
    SolverParams, TemperatureField,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument lies outside the operation's domain.
    Domain = 2,
    /// A precondition was violated (for example unpinned Dirichlet ends).
    Contract = 3,
    /// A non-finite value appeared.
    Diverged = 4,
    WorkerFailed = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HeatParams {
    pub alpha: f64,
    pub dt: f64,
    pub dx: f64,
    /// Non-zero skips the `r <= 0.5` stability check.
    pub allow_unstable: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatBoundaryKind {
    Dirichlet = 0,
    Periodic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HeatBoundary {
    pub kind: HeatBoundaryKind,
    /// Left and right end values; ignored for periodic boundaries.
    pub c1: f64,
    pub c2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatDelayLaw {
    Uniform = 0,
    Fixed = 1,
    TruncatedGeometric = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HeatDelay {
    /// Buffer length; 1 means no staleness.
    pub q: usize,
    pub law: HeatDelayLaw,
    /// Used by `HEAT_DELAY_LAW_FIXED`.
    pub fixed_delay: usize,
    /// Used by `HEAT_DELAY_LAW_TRUNCATED_GEOMETRIC`.
    pub p: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatExecMode {
    Barriered = 0,
    BarrierFree = 1,
}

/// Opaque stepping state of one (possibly asynchronous) run.
pub struct HeatSimulation {
    inner: AsyncSimulator,
}

/// Opaque result of an ensemble run.
pub struct HeatEnsemble {
    inner: EnsembleResult,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(HeatStatus, String);

impl From<HeatError> for Failure {
    fn from(e: HeatError) -> Self {
        let status = match e {
            HeatError::Domain(_) => HeatStatus::Domain,
            HeatError::Contract(_) => HeatStatus::Contract,
            HeatError::Diverged { .. } => HeatStatus::Diverged,
            HeatError::Worker { .. } => HeatStatus::WorkerFailed,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HeatStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HeatStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure(HeatStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            HeatStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Failure(
            HeatStatus::BufferTooSmall,
            format!("{what} holds {len} values, {need} required"),
        ));
    }
    Ok(slice::from_raw_parts_mut(ptr, need))
}

unsafe fn write_out<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(value);
    Ok(())
}

fn solver_params(p: &HeatParams) -> Result<SolverParams, Failure> {
    Ok(if p.allow_unstable != 0 {
        SolverParams::unchecked(p.alpha, p.dt, p.dx)?
    } else {
        SolverParams::new(p.alpha, p.dt, p.dx)?
    })
}

fn boundary(b: &HeatBoundary) -> BoundaryCondition {
    match b.kind {
        HeatBoundaryKind::Dirichlet => BoundaryCondition::Dirichlet { c1: b.c1, c2: b.c2 },
        HeatBoundaryKind::Periodic => BoundaryCondition::Periodic,
    }
}

fn delay_model(d: &HeatDelay) -> Result<DelayModel, Failure> {
    let law = match d.law {
        HeatDelayLaw::Uniform => DelayLaw::Uniform,
        HeatDelayLaw::Fixed => DelayLaw::Fixed(d.fixed_delay),
        HeatDelayLaw::TruncatedGeometric => DelayLaw::TruncatedGeometric { p: d.p },
    };
    Ok(DelayModel::new(d.q, law, d.seed)?)
}

fn field(values: &[f64]) -> Result<TemperatureField, Failure> {
    Ok(TemperatureField::new(values.to_vec())?)
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn heat_status_str(status: HeatStatus) -> *const c_char {
    let s: &'static CStr = match status {
        HeatStatus::Ok => c"ok",
        HeatStatus::NullPointer => c"null pointer argument",
        HeatStatus::Domain => c"argument outside the domain",
        HeatStatus::Contract => c"precondition violated",
        HeatStatus::Diverged => c"non-finite value",
        HeatStatus::WorkerFailed => c"worker thread failed",
        HeatStatus::BufferTooSmall => c"output buffer too small",
        HeatStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to `len - 1` bytes) into `buf`. Returns the full message length in bytes,
/// excluding the terminator; 0 means the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn heat_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `r = alpha * dt / dx^2`.
///
/// # Safety
/// `out_r` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn heat_derive_r(alpha: f64, dt: f64, dx: f64, out_r: *mut f64) -> HeatStatus {
    guard(|| {
        let r = async_heat::derive_r(alpha, dt, dx)?;
        write_out(out_r, r, "out_r")
    })
}

/// Writes `cos^2(3*pi/2 * i/(n-1))` for `i < n` into `out`.
///
/// # Safety
/// `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_cosine_init(n: usize, out: *mut f64, out_len: usize) -> HeatStatus {
    guard(|| {
        let u = cosine_init(n)?;
        output(out, out_len, n, "out")?.copy_from_slice(u.values());
        Ok(())
    })
}

/// Writes the linear profile from `c1` to `c2` over `n` points.
///
/// # Safety
/// `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_linear_steady_state(
    n: usize,
    c1: f64,
    c2: f64,
    out: *mut f64,
    out_len: usize,
) -> HeatStatus {
    guard(|| {
        let u = linear_steady_state(n, c1, c2)?;
        output(out, out_len, n, "out")?.copy_from_slice(u.values());
        Ok(())
    })
}

/// Overwrites the end points of `values` with the Dirichlet constants.
/// Periodic boundaries leave the array untouched.
///
/// # Safety
/// `values` must point to `n` readable and writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_impose_boundary(values: *mut f64, n: usize, bc: HeatBoundary) -> HeatStatus {
    guard(|| {
        let buf = output(values, n, n, "values")?;
        let imposed = boundary(&bc).impose(&field(buf)?)?;
        buf.copy_from_slice(imposed.values());
        Ok(())
    })
}

/// # Safety
/// `values` must point to `n` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn heat_l2_norm(values: *const f64, n: usize, out: *mut f64) -> HeatStatus {
    guard(|| {
        let u = field(input(values, n, "values")?)?;
        write_out(out, l2_norm(&u), "out")
    })
}

/// # Safety
/// `values` must point to `n` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn heat_total_heat(values: *const f64, n: usize, out: *mut f64) -> HeatStatus {
    guard(|| {
        let u = field(input(values, n, "values")?)?;
        write_out(out, total_heat(&u), "out")
    })
}

/// Creates a run over `n` points split into PEs of `per_pe` points. A delay
/// with `q = 1` gives the synchronous scheme.
///
/// # Safety
/// `u0` must point to `n` readable doubles and `out` must be valid for writes.
/// The handle written to `out` must be released with [`heat_simulation_free`].
#[no_mangle]
pub unsafe extern "C" fn heat_simulation_new(
    u0: *const f64,
    n: usize,
    params: HeatParams,
    bc: HeatBoundary,
    per_pe: usize,
    delay: HeatDelay,
    out: *mut *mut HeatSimulation,
) -> HeatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let u0 = field(input(u0, n, "u0")?)?;
        let part = PartitionSpec::new(n, per_pe)?;
        let sim = AsyncSimulator::new(&u0, &solver_params(&params)?, &boundary(&bc), &part, &delay_model(&delay)?)?;
        out.write(Box::into_raw(Box::new(HeatSimulation { inner: sim })));
        Ok(())
    })
}

/// Advances the run by `steps` steps.
///
/// # Safety
/// `sim` must be a live handle from [`heat_simulation_new`].
#[no_mangle]
pub unsafe extern "C" fn heat_simulation_step(sim: *mut HeatSimulation, steps: usize) -> HeatStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..steps {
            sim.inner.step()?;
        }
        match sim.inner.current().iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Failure(HeatStatus::Diverged, format!("non-finite value at index {i}"))),
            None => Ok(()),
        }
    })
}

/// Current step index, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn heat_simulation_step_index(sim: *const HeatSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.step_index())
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn heat_simulation_len(sim: *const HeatSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.current().len())
}

/// Copies the current field into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_simulation_state(
    sim: *const HeatSimulation,
    out: *mut f64,
    out_len: usize,
) -> HeatStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let cur = sim.inner.current();
        output(out, out_len, cur.len(), "out")?.copy_from_slice(cur);
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from [`heat_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn heat_simulation_free(sim: *mut HeatSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs the threaded executor with `n / per_pe` workers and writes the final
/// field to `out` and the wall time in nanoseconds to `out_elapsed_ns`
/// (which may be null).
///
/// # Safety
/// `u0` must point to `n` readable doubles, `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_exec_run(
    u0: *const f64,
    n: usize,
    params: HeatParams,
    bc: HeatBoundary,
    per_pe: usize,
    mode: HeatExecMode,
    k_end: usize,
    out: *mut f64,
    out_len: usize,
    out_elapsed_ns: *mut u64,
) -> HeatStatus {
    guard(|| {
        let u0 = field(input(u0, n, "u0")?)?;
        let part = PartitionSpec::new(n, per_pe)?;
        let mode = match mode {
            HeatExecMode::Barriered => ExecMode::Barriered,
            HeatExecMode::BarrierFree => ExecMode::BarrierFree,
        };
        let cfg = ExecConfig::new(part.pe_count(), k_end, mode)?;
        let result = exec_run(&u0, &solver_params(&params)?, &boundary(&bc), &part, &cfg)?;
        output(out, out_len, n, "out")?.copy_from_slice(result.field.values());
        if !out_elapsed_ns.is_null() {
            out_elapsed_ns.write(result.elapsed.as_nanos() as u64);
        }
        Ok(())
    })
}

/// Runs `runs` asynchronous simulations with seeds `base_seed + j` (the seed
/// in `delay` is ignored), recording the 2-norm every `stride` steps.
///
/// # Safety
/// `u0` must point to `n` readable doubles and `out` must be valid for writes.
/// The handle must be released with [`heat_ensemble_free`].
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_run(
    u0: *const f64,
    n: usize,
    params: HeatParams,
    bc: HeatBoundary,
    per_pe: usize,
    delay: HeatDelay,
    k_end: usize,
    stride: usize,
    runs: usize,
    base_seed: u64,
    out: *mut *mut HeatEnsemble,
) -> HeatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = EnsembleConfig {
            u0: field(input(u0, n, "u0")?)?,
            params: solver_params(&params)?,
            bc: boundary(&bc),
            part: PartitionSpec::new(n, per_pe)?,
            model: delay_model(&delay)?,
            k_end,
            stride: Stride::every(stride)?,
        };
        let res = ensemble_run(&config, runs, base_seed)?;
        out.write(Box::into_raw(Box::new(HeatEnsemble { inner: res })));
        Ok(())
    })
}

/// Number of runs, or 0 for a null handle.
///
/// # Safety
/// `ens` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_runs(ens: *const HeatEnsemble) -> usize {
    ens.as_ref().map_or(0, |e| e.inner.runs.len())
}

/// Number of recorded steps per series, or 0 for a null handle.
///
/// # Safety
/// `ens` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_series_len(ens: *const HeatEnsemble) -> usize {
    ens.as_ref().map_or(0, |e| e.inner.steps.len())
}

unsafe fn copy_series(
    ens: *const HeatEnsemble,
    out: *mut f64,
    out_len: usize,
    pick: impl FnOnce(&EnsembleResult) -> Result<Vec<f64>, Failure>,
) -> HeatStatus {
    guard(|| {
        let ens = ens.as_ref().ok_or_else(|| null("ens"))?;
        let values = pick(&ens.inner)?;
        output(out, out_len, values.len(), "out")?.copy_from_slice(&values);
        Ok(())
    })
}

fn run_index(res: &EnsembleResult, run: usize) -> Result<usize, Failure> {
    if run < res.runs.len() {
        Ok(run)
    } else {
        Err(Failure(HeatStatus::Domain, format!("run {run} out of range")))
    }
}

/// Recorded step indices (as doubles).
///
/// # Safety
/// `ens` must be a live handle and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_steps(ens: *const HeatEnsemble, out: *mut f64, out_len: usize) -> HeatStatus {
    copy_series(ens, out, out_len, |r| Ok(r.steps.iter().map(|&k| k as f64).collect()))
}

/// Per-step mean of the 2-norms.
///
/// # Safety
/// `ens` must be a live handle and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_mean(ens: *const HeatEnsemble, out: *mut f64, out_len: usize) -> HeatStatus {
    copy_series(ens, out, out_len, |r| Ok(r.mean.clone()))
}

/// Per-step standard deviation of the 2-norms.
///
/// # Safety
/// `ens` must be a live handle and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_std(ens: *const HeatEnsemble, out: *mut f64, out_len: usize) -> HeatStatus {
    copy_series(ens, out, out_len, |r| Ok(r.spread.clone()))
}

/// 2-norm series of one run.
///
/// # Safety
/// `ens` must be a live handle and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_norms(
    ens: *const HeatEnsemble,
    run: usize,
    out: *mut f64,
    out_len: usize,
) -> HeatStatus {
    copy_series(ens, out, out_len, |r| Ok(r.runs[run_index(r, run)?].norms.clone()))
}

/// Terminal field of one run.
///
/// # Safety
/// `ens` must be a live handle and `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_terminal(
    ens: *const HeatEnsemble,
    run: usize,
    out: *mut f64,
    out_len: usize,
) -> HeatStatus {
    copy_series(ens, out, out_len, |r| Ok(r.runs[run_index(r, run)?].terminal.values().to_vec()))
}

/// Standard deviation across runs of the terminal mean temperature and of
/// the terminal 2-norm. Needs at least two runs.
///
/// # Safety
/// `ens` must be a live handle; both outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_terminal_spread(
    ens: *const HeatEnsemble,
    out_mean_temperature: *mut f64,
    out_norm2: *mut f64,
) -> HeatStatus {
    guard(|| {
        let ens = ens.as_ref().ok_or_else(|| null("ens"))?;
        let spread = terminal_spread(&ens.inner)?;
        write_out(out_mean_temperature, spread.mean_temperature, "out_mean_temperature")?;
        write_out(out_norm2, spread.norm2, "out_norm2")
    })
}

/// # Safety
/// `ens` must be null or a handle from [`heat_ensemble_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn heat_ensemble_free(ens: *mut HeatEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}
