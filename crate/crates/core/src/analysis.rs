//! Seeded ensembles of asynchronous runs and their spread statistics.

use rayon::prelude::*;

use crate::async_sim::{AsyncSimulator, DelayModel};
use crate::error::{domain, Result};
use crate::field::{compensated_sum, l2_norm, norm2, BoundaryCondition, TemperatureField};
use crate::params::SolverParams;
use crate::partition::PartitionSpec;
use crate::sync::{Stride, Trajectory};

/// Everything shared by the members of an ensemble. The seed inside `model`
/// is ignored; member `j` uses `base_seed + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub u0: TemperatureField,
    pub params: SolverParams,
    pub bc: BoundaryCondition,
    pub part: PartitionSpec,
    pub model: DelayModel,
    pub k_end: usize,
    pub stride: Stride,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub seed: u64,
    /// 2-norm at each recorded step.
    pub norms: Vec<f64>,
    pub terminal: TemperatureField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub steps: Vec<usize>,
    pub runs: Vec<EnsembleRun>,
    /// Per-step mean of the 2-norms across runs.
    pub mean: Vec<f64>,
    /// Per-step population standard deviation of the 2-norms.
    pub spread: Vec<f64>,
}

impl EnsembleResult {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.runs.iter().map(|r| r.seed).collect()
    }
}

/// Population mean and standard deviation, independent of input order.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return (sorted[0], 0.0);
    }
    let m = sorted.len() as f64;
    let mean = compensated_sum(sorted.iter().copied()) / m;
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (compensated_sum(dev) / m).sqrt())
}

fn one_run(config: &EnsembleConfig, seed: u64) -> Result<(Vec<usize>, EnsembleRun)> {
    let model = config.model.with_seed(seed);
    let mut sim = AsyncSimulator::new(&config.u0, &config.params, &config.bc, &config.part, &model)?;
    let mut steps = vec![0];
    let mut norms = vec![l2_norm(&config.u0)];
    let (k_end, stride) = (config.k_end, config.stride);
    sim.run_until(k_end, |k, values| {
        if stride.records(k, k_end) {
            steps.push(k);
            norms.push(norm2(values));
        }
    })?;
    Ok((steps, EnsembleRun { seed, norms, terminal: sim.field() }))
}

/// Runs `m` members with seeds `base_seed, base_seed + 1, …` (wrapping),
/// in parallel, and aggregates their 2-norm series.
pub fn ensemble_run(config: &EnsembleConfig, m: usize, base_seed: u64) -> Result<EnsembleResult> {
    if m == 0 {
        return Err(domain("an ensemble needs at least one run"));
    }
    let results: Vec<(Vec<usize>, EnsembleRun)> = (0..m as u64)
        .into_par_iter()
        .map(|j| one_run(config, base_seed.wrapping_add(j)))
        .collect::<Result<_>>()?;
    let steps = results[0].0.clone();
    let runs: Vec<EnsembleRun> = results.into_iter().map(|(_, run)| run).collect();
    let (mean, spread) = (0..steps.len())
        .map(|t| {
            let column: Vec<f64> = runs.iter().map(|r| r.norms[t]).collect();
            mean_and_std(&column)
        })
        .unzip();
    Ok(EnsembleResult { steps, runs, mean, spread })
}

/// First recorded step whose snapshot lies within `tol` (max-abs) of
/// `reference`. `tol` must be positive.
pub fn convergence_check(traj: &Trajectory, reference: &TemperatureField, tol: f64) -> Option<usize> {
    assert!(tol > 0.0, "tolerance must be positive, got {tol}");
    traj.iter()
        .find(|(_, snap)| snap.max_abs_diff(reference) <= tol)
        .map(|(k, _)| k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalSpread {
    /// Std of the terminal mean temperature across runs.
    pub mean_temperature: f64,
    /// Std of the terminal 2-norm across runs.
    pub norm2: f64,
}

pub fn terminal_spread(res: &EnsembleResult) -> Result<TerminalSpread> {
    if res.runs.len() < 2 {
        return Err(domain(format!(
            "terminal spread needs at least 2 runs, got {}",
            res.runs.len()
        )));
    }
    let means: Vec<f64> = res.runs.iter().map(|r| r.terminal.mean()).collect();
    let norms: Vec<f64> = res.runs.iter().map(|r| l2_norm(&r.terminal)).collect();
    Ok(TerminalSpread {
        mean_temperature: mean_and_std(&means).1,
        norm2: mean_and_std(&norms).1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::async_sim::DelayLaw;
    use crate::field::{cosine_init, linear_steady_state};
    use crate::sync::sync_run;
    use proptest::prelude::*;

    const HOT_COLD: BoundaryCondition = BoundaryCondition::Dirichlet { c1: 1.0, c2: 0.0 };

    fn small(bc: BoundaryCondition, k_end: usize) -> EnsembleConfig {
        EnsembleConfig {
            u0: bc.impose(&cosine_init(20).unwrap()).unwrap(),
            params: SolverParams::new(0.5, 0.01, 0.1).unwrap(),
            bc,
            part: PartitionSpec::pointwise(20).unwrap(),
            model: DelayModel::new(4, DelayLaw::Uniform, 0).unwrap(),
            k_end,
            stride: Stride::EVERY_STEP,
        }
    }

    #[test]
    fn singleton_ensemble() {
        let res = ensemble_run(&small(HOT_COLD, 200), 1, 9).unwrap();
        assert_eq!(res.mean, res.runs[0].norms);
        assert!(res.spread.iter().all(|s| *s == 0.0));
        assert_eq!(res.steps.len(), 201);
        assert!(terminal_spread(&res).is_err());
    }

    #[test]
    fn duplicate_seeds_have_no_spread() {
        let cfg = small(BoundaryCondition::Periodic, 300);
        let a = ensemble_run(&cfg, 1, 5).unwrap();
        let b = ensemble_run(&cfg, 1, 5).unwrap();
        let merged = EnsembleResult {
            steps: a.steps.clone(),
            runs: vec![a.runs[0].clone(), b.runs[0].clone()],
            mean: a.mean.clone(),
            spread: vec![0.0; a.steps.len()],
        };
        let spread = terminal_spread(&merged).unwrap();
        assert_eq!(spread.mean_temperature, 0.0);
        assert_eq!(spread.norm2, 0.0);
        let column = vec![a.runs[0].norms[10]; 2];
        assert_eq!(mean_and_std(&column), (column[0], 0.0));
    }

    #[test]
    fn seeds_follow_schedule() {
        let res = ensemble_run(&small(HOT_COLD, 10), 3, u64::MAX).unwrap();
        assert_eq!(res.seeds(), vec![u64::MAX, 0, 1]);
    }

    #[test]
    fn convergence_check_examples() {
        let p = SolverParams::new(0.5, 0.01, 0.1).unwrap();
        let u0 = HOT_COLD.impose(&cosine_init(100).unwrap()).unwrap();
        let t = sync_run(&u0, &p, &HOT_COLD, 50, Stride::EVERY_STEP).unwrap();
        assert_eq!(convergence_check(&t, &u0, 1e300), Some(0));

        let unstable = SolverParams::from_r_unchecked(0.6).unwrap();
        let zero = BoundaryCondition::Dirichlet { c1: 0.0, c2: 0.0 };
        let alt = TemperatureField::new(
            (0..100).map(|i| if i == 0 || i == 99 { 0.0 } else if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
        )
        .unwrap();
        let t = sync_run(&alt, &unstable, &zero, 100, Stride::EVERY_STEP).unwrap();
        let rest = TemperatureField::constant(100, 0.0).unwrap();
        assert_eq!(convergence_check(&t, &rest, 1e-6), None);
    }

    #[test]
    fn convergence_step_for_section5_sync_run() {
        let p = SolverParams::new(0.5, 0.01, 0.1).unwrap();
        let u0 = HOT_COLD.impose(&cosine_init(100).unwrap()).unwrap();
        let t = sync_run(&u0, &p, &HOT_COLD, 100_000, Stride::EVERY_STEP).unwrap();
        let target = linear_steady_state(100, 1.0, 0.0).unwrap();
        let k = convergence_check(&t, &target, 1e-6).unwrap();
        assert_eq!(k, GOLDEN_CONVERGENCE_STEP);
    }

    // Frozen from an independent numpy evaluation of the same stencil.
    const GOLDEN_CONVERGENCE_STEP: usize = 6584;

    proptest! {
        #[test]
        fn statistics_ignore_order(mut v in prop::collection::vec(-1e3f64..1e3, 1..40), seed: u64) {
            let before = mean_and_std(&v);
            let mut rng = crate::rng::SplitMix64::new(seed);
            for i in (1..v.len()).rev() {
                v.swap(i, rng.below(i as u64 + 1) as usize);
            }
            prop_assert_eq!(mean_and_std(&v), before);
        }
    }
}
