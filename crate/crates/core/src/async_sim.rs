//! Seeded simulation of asynchronous updates with bounded staleness.
//!
//! Each grid point updates from its own value at step `k`. A neighbour that
//! lives on the same processing element is read at step `k` as well; a
//! neighbour on another PE is read at step `k - d`, where the delay `d` is
//! drawn afresh for every (point, neighbour, step) from a [`DelayModel`] with
//! buffer length `q`, so `d <= q - 1`. Near the start of a run the delay is
//! clamped to `k` so reads never precede the initial field.
//!
//! Draw order is fixed: points in ascending index, left neighbour before
//! right neighbour, and only cross-PE reads consume random numbers. That
//! order plus the seed fully determines a run.

use crate::error::{contract, domain, Result};
use crate::field::{BoundaryCondition, TemperatureField};
use crate::params::SolverParams;
use crate::partition::PartitionSpec;
use crate::rng::SplitMix64;
use crate::stencil::{check_finite, update};
use crate::sync::{Stride, Trajectory};

/// Distribution of the raw delay over `0..q`, before start-up clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayLaw {
    Uniform,
    Fixed(usize),
    /// `P(d) ∝ p (1 - p)^d` on `0..q`.
    TruncatedGeometric { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayModel {
    q: usize,
    law: DelayLaw,
    seed: u64,
}

impl DelayModel {
    pub fn new(q: usize, law: DelayLaw, seed: u64) -> Result<Self> {
        if q == 0 {
            return Err(domain("buffer length q must be at least 1"));
        }
        match law {
            DelayLaw::Fixed(d) if d >= q => {
                return Err(domain(format!("fixed delay {d} must be below q = {q}")));
            }
            DelayLaw::TruncatedGeometric { p } if !(p > 0.0 && p <= 1.0) => {
                return Err(domain(format!("geometric parameter p = {p} must lie in (0, 1]")));
            }
            _ => {}
        }
        Ok(Self { q, law, seed })
    }

    /// `q = 1`: every read is current, which reduces to the synchronous scheme.
    pub fn synchronous() -> Self {
        Self { q: 1, law: DelayLaw::Uniform, seed: 0 }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn law(&self) -> DelayLaw {
        self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self) -> SplitMix64 {
        SplitMix64::new(self.seed)
    }
}

/// Draws the staleness of one cross-PE read at step `k`; the result lies in
/// `0..=min(q - 1, k)`. Laws with a single-point support consume no randomness.
pub fn sample_delay(rng: &mut SplitMix64, model: &DelayModel, k: usize) -> usize {
    let q = model.q;
    let raw = if q == 1 {
        0
    } else {
        match model.law {
            DelayLaw::Uniform => rng.below(q as u64) as usize,
            DelayLaw::Fixed(d) => d,
            DelayLaw::TruncatedGeometric { p } if p >= 1.0 => 0,
            DelayLaw::TruncatedGeometric { p } => {
                let keep = 1.0 - p;
                let mass = 1.0 - keep.powi(q as i32);
                let u = rng.unit_f64();
                let d = ((1.0 - u * mass).ln() / keep.ln()).floor();
                (d as usize).min(q - 1)
            }
        }
    };
    raw.min(k)
}

/// The last `q` fields of a run, `u(k), u(k-1), …, u(k-q+1)`, or fewer near
/// the start.
#[derive(Debug, Clone)]
pub struct HistoryRing {
    q: usize,
    k: usize,
    // q + 1 slots so the next step can be written without disturbing
    // anything readable during the current one.
    slots: Vec<Vec<f64>>,
}

impl HistoryRing {
    pub fn new(u0: &TemperatureField, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(domain("buffer length q must be at least 1"));
        }
        let mut slots = vec![vec![0.0; u0.len()]; q + 1];
        slots[0].copy_from_slice(u0.values());
        Ok(Self { q, k: 0, slots })
    }

    pub fn depth(&self) -> usize {
        self.q
    }

    /// Step index of the newest field.
    pub fn step(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.slots[0].len()
    }

    /// Number of fields currently readable.
    pub fn available(&self) -> usize {
        self.q.min(self.k + 1)
    }

    /// `u_i(k - d)`.
    pub fn read(&self, i: usize, d: usize) -> Result<f64> {
        if d >= self.q || d > self.k {
            return Err(contract(format!(
                "delay {d} is outside the history (q = {}, k = {})",
                self.q, self.k
            )));
        }
        if i >= self.n_points() {
            return Err(contract(format!("point {i} is outside the grid")));
        }
        Ok(self.get(i, d))
    }

    pub fn current(&self) -> &[f64] {
        &self.slots[self.k % self.slots.len()]
    }

    pub fn push(&mut self, field: &TemperatureField) -> Result<()> {
        if field.len() != self.n_points() {
            return Err(contract(format!(
                "field has {} points, history holds {}",
                field.len(),
                self.n_points()
            )));
        }
        let next = (self.k + 1) % self.slots.len();
        self.slots[next].copy_from_slice(field.values());
        self.k += 1;
        Ok(())
    }

    #[inline(always)]
    fn get(&self, i: usize, d: usize) -> f64 {
        let cap = self.slots.len();
        self.slots[(self.k + cap - d) % cap][i]
    }

    fn advance(&mut self, scratch: &mut Vec<f64>) {
        let next = (self.k + 1) % self.slots.len();
        std::mem::swap(&mut self.slots[next], scratch);
        self.k += 1;
    }
}

#[derive(Debug, Clone, Copy)]
enum PointRule {
    Pinned(f64),
    Stencil { left: usize, right: usize, left_cross: bool, right_cross: bool },
}

fn plan(bc: &BoundaryCondition, part: &PartitionSpec) -> Vec<PointRule> {
    let n = part.n_points();
    (0..n)
        .map(|i| match *bc {
            BoundaryCondition::Dirichlet { c1, .. } if i == 0 => PointRule::Pinned(c1),
            BoundaryCondition::Dirichlet { c2, .. } if i == n - 1 => PointRule::Pinned(c2),
            _ => {
                let left = (i + n - 1) % n;
                let right = (i + 1) % n;
                let pe = part.pe_of(i);
                PointRule::Stencil {
                    left,
                    right,
                    left_cross: part.pe_of(left) != pe,
                    right_cross: part.pe_of(right) != pe,
                }
            }
        })
        .collect()
}

fn compute_step(
    ring: &HistoryRing,
    rules: &[PointRule],
    r: f64,
    model: &DelayModel,
    rng: &mut SplitMix64,
    out: &mut [f64],
) {
    let k = ring.step();
    let cur = ring.current();
    let neighbour = |j: usize, cross: bool, rng: &mut SplitMix64| {
        if cross {
            ring.get(j, sample_delay(rng, model, k))
        } else {
            cur[j]
        }
    };
    for (i, (rule, slot)) in rules.iter().zip(out.iter_mut()).enumerate() {
        *slot = match *rule {
            PointRule::Pinned(c) => c,
            PointRule::Stencil { left, right, left_cross, right_cross } => {
                let l = neighbour(left, left_cross, rng);
                let rt = neighbour(right, right_cross, rng);
                update(l, cur[i], rt, r)
            }
        };
    }
}

fn check_setup(n: usize, bc: &BoundaryCondition, part: &PartitionSpec, current: &[f64]) -> Result<()> {
    if part.n_points() != n {
        return Err(contract(format!(
            "partition covers {} points, field has {n}",
            part.n_points()
        )));
    }
    bc.check_ends(current)
}

/// One asynchronous step from the newest field in `hist`. The history is not
/// modified; the caller pushes the result.
pub fn async_step(
    hist: &HistoryRing,
    params: &SolverParams,
    bc: &BoundaryCondition,
    part: &PartitionSpec,
    model: &DelayModel,
    rng: &mut SplitMix64,
) -> Result<TemperatureField> {
    if hist.depth() < model.q() {
        return Err(contract(format!(
            "history depth {} is shorter than q = {}",
            hist.depth(),
            model.q()
        )));
    }
    check_setup(hist.n_points(), bc, part, hist.current())?;
    let rules = plan(bc, part);
    let mut out = vec![0.0; hist.n_points()];
    compute_step(hist, &rules, params.r(), model, rng, &mut out);
    check_finite(&out, hist.step() + 1)?;
    Ok(TemperatureField::from_vec_unchecked(out))
}

/// Owns the state of one asynchronous run and advances it step by step.
#[derive(Debug, Clone)]
pub struct AsyncSimulator {
    ring: HistoryRing,
    scratch: Vec<f64>,
    rules: Vec<PointRule>,
    r: f64,
    model: DelayModel,
    rng: SplitMix64,
}

impl AsyncSimulator {
    pub fn new(
        u0: &TemperatureField,
        params: &SolverParams,
        bc: &BoundaryCondition,
        part: &PartitionSpec,
        model: &DelayModel,
    ) -> Result<Self> {
        check_setup(u0.len(), bc, part, u0.values())?;
        Ok(Self {
            ring: HistoryRing::new(u0, model.q())?,
            scratch: vec![0.0; u0.len()],
            rules: plan(bc, part),
            r: params.r(),
            model: *model,
            rng: model.rng(),
        })
    }

    pub fn step(&mut self) -> Result<()> {
        compute_step(&self.ring, &self.rules, self.r, &self.model, &mut self.rng, &mut self.scratch);
        self.ring.advance(&mut self.scratch);
        if cfg!(debug_assertions) {
            check_finite(self.ring.current(), self.ring.step())?;
        }
        Ok(())
    }

    /// Advances to step `k_end`, calling `observe` after every step.
    pub fn run_until(
        &mut self,
        k_end: usize,
        mut observe: impl FnMut(usize, &[f64]),
    ) -> Result<()> {
        while self.ring.step() < k_end {
            self.step()?;
            observe(self.ring.step(), self.ring.current());
        }
        Ok(())
    }

    pub fn step_index(&self) -> usize {
        self.ring.step()
    }

    pub fn current(&self) -> &[f64] {
        self.ring.current()
    }

    pub fn field(&self) -> TemperatureField {
        TemperatureField::from_vec_unchecked(self.ring.current().to_vec())
    }

    pub fn history(&self) -> &HistoryRing {
        &self.ring
    }
}

/// Runs `k_end` asynchronous steps, keeping the snapshots selected by `stride`.
pub fn async_run(
    u0: &TemperatureField,
    params: &SolverParams,
    bc: &BoundaryCondition,
    part: &PartitionSpec,
    model: &DelayModel,
    k_end: usize,
    stride: Stride,
) -> Result<Trajectory> {
    let mut sim = AsyncSimulator::new(u0, params, bc, part, model)?;
    let mut traj = Trajectory::new(*params, *bc);
    traj.push(0, u0.clone());
    sim.run_until(k_end, |k, values| {
        if stride.records(k, k_end) {
            traj.push(k, TemperatureField::from_vec_unchecked(values.to_vec()));
        }
    })?;
    Ok(traj)
}
