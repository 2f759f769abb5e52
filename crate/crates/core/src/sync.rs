use std::num::NonZeroUsize;

use crate::error::{domain, Result};
use crate::field::{BoundaryCondition, TemperatureField};
use crate::params::SolverParams;
use crate::stencil::{check_finite, step_slice};

/// Grids above this size record every 100th step by default.
pub const AUTO_STRIDE_LIMIT: usize = 1000;

/// Which steps a run keeps. Step 0 and the final step are always kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stride(NonZeroUsize);

impl Stride {
    pub const EVERY_STEP: Stride = Stride(NonZeroUsize::MIN);

    pub fn every(steps: usize) -> Result<Self> {
        NonZeroUsize::new(steps)
            .map(Stride)
            .ok_or_else(|| domain("record stride must be at least 1"))
    }

    /// Every step for small grids, every 100th above [`AUTO_STRIDE_LIMIT`] points.
    pub fn auto(n_points: usize) -> Self {
        if n_points <= AUTO_STRIDE_LIMIT {
            Self::EVERY_STEP
        } else {
            Stride(NonZeroUsize::new(100).unwrap())
        }
    }

    pub fn get(&self) -> usize {
        self.0.get()
    }

    pub fn records(&self, k: usize, k_end: usize) -> bool {
        k.is_multiple_of(self.0.get()) || k == k_end
    }
}

/// Recorded snapshots of a run, with the step index of each.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps: Vec<usize>,
    snapshots: Vec<TemperatureField>,
    params: SolverParams,
    bc: BoundaryCondition,
}

impl Trajectory {
    pub(crate) fn new(params: SolverParams, bc: BoundaryCondition) -> Self {
        Self { steps: Vec::new(), snapshots: Vec::new(), params, bc }
    }

    /// Assembles a trajectory from recorded steps, which must be strictly
    /// increasing and paired one-to-one with `snapshots`.
    pub fn from_parts(
        params: SolverParams,
        bc: BoundaryCondition,
        steps: Vec<usize>,
        snapshots: Vec<TemperatureField>,
    ) -> Result<Self> {
        if steps.is_empty() || steps.len() != snapshots.len() {
            return Err(domain("steps and snapshots must be non-empty and of equal length"));
        }
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("recorded steps must be strictly increasing"));
        }
        if snapshots.iter().any(|s| s.len() != snapshots[0].len()) {
            return Err(domain("snapshots differ in length"));
        }
        Ok(Self { steps, snapshots, params, bc })
    }

    pub(crate) fn push(&mut self, k: usize, field: TemperatureField) {
        debug_assert!(self.steps.last().is_none_or(|&last| last < k));
        self.steps.push(k);
        self.snapshots.push(field);
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn snapshots(&self) -> &[TemperatureField] {
        &self.snapshots
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &TemperatureField)> {
        self.steps.iter().copied().zip(&self.snapshots)
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn initial(&self) -> &TemperatureField {
        &self.snapshots[0]
    }

    pub fn final_field(&self) -> &TemperatureField {
        self.snapshots.last().expect("trajectory holds at least the initial field")
    }

    /// Index of the last recorded step.
    pub fn k_end(&self) -> usize {
        *self.steps.last().expect("trajectory holds at least the initial field")
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn bc(&self) -> &BoundaryCondition {
        &self.bc
    }
}

/// Applies one synchronous step.
pub fn sync_step(
    u: &TemperatureField,
    params: &SolverParams,
    bc: &BoundaryCondition,
) -> Result<TemperatureField> {
    bc.check_ends(u.values())?;
    let mut next = vec![0.0; u.len()];
    step_slice(u.values(), &mut next, params.r(), bc);
    check_finite(&next, 1)?;
    Ok(TemperatureField::from_vec_unchecked(next))
}

/// Runs `k_end` synchronous steps, keeping the snapshots selected by `stride`.
pub fn sync_run(
    u0: &TemperatureField,
    params: &SolverParams,
    bc: &BoundaryCondition,
    k_end: usize,
    stride: Stride,
) -> Result<Trajectory> {
    bc.check_ends(u0.values())?;
    let mut traj = Trajectory::new(*params, *bc);
    traj.push(0, u0.clone());
    let r = params.r();
    let mut cur = u0.values().to_vec();
    let mut next = cur.clone();
    for k in 1..=k_end {
        step_slice(&cur, &mut next, r, bc);
        std::mem::swap(&mut cur, &mut next);
        if cfg!(debug_assertions) {
            check_finite(&cur, k)?;
        }
        if stride.records(k, k_end) {
            traj.push(k, TemperatureField::from_vec_unchecked(cur.clone()));
        }
    }
    Ok(traj)
}

/// [`sync_run`] carried out in `f32`, mirroring single-precision GPU kernels.
/// Snapshots are widened back to `f64` (exactly) for recording.
pub fn sync_run_single_precision(
    u0: &TemperatureField,
    params: &SolverParams,
    bc: &BoundaryCondition,
    k_end: usize,
    stride: Stride,
) -> Result<Trajectory> {
    let narrowed: Vec<f32> = u0.values().iter().map(|&v| v as f32).collect();
    let widen = |v: &[f32]| -> Result<TemperatureField> {
        TemperatureField::new(v.iter().map(|&x| f64::from(x)).collect())
    };
    let start = widen(&narrowed)?;
    bc.check_ends(start.values())?;
    let mut traj = Trajectory::new(*params, *bc);
    traj.push(0, start);
    let r = params.r() as f32;
    let mut cur = narrowed;
    let mut next = cur.clone();
    for k in 1..=k_end {
        step_slice(&cur, &mut next, r, bc);
        std::mem::swap(&mut cur, &mut next);
        check_finite(&cur, k)?;
        if stride.records(k, k_end) {
            traj.push(k, widen(&cur)?);
        }
    }
    Ok(traj)
}
