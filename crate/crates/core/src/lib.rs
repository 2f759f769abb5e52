//! Explicit finite-difference solvers for the 1D heat equation
//! `u_t = alpha * u_xx`, in three flavours:
//!
//! * [`sync`]: the deterministic reference stepper (every point reads its
//!   neighbours at step `k`).
//! * [`async_sim`]: a seeded simulation of asynchronous updates where reads
//!   across processing-element (PE) boundaries may be up to `q - 1` steps stale.
//! * [`exec`]: real multi-threaded executors, one barriered and one
//!   barrier-free, exchanging PE edge values through atomic mailboxes.
//!
//! [`analysis`] drives seeded ensembles over the asynchronous simulator and
//! [`bench`] times the executors. [`io`] holds the configuration format and
//! the CSV/SVG emitters used by the `heat` binary.

pub mod analysis;
pub mod async_sim;
pub mod bench;
pub mod error;
pub mod exec;
pub mod field;
pub mod io;
pub mod params;
pub mod partition;
pub mod rng;
pub mod stencil;
pub mod sync;

pub use analysis::{
    convergence_check, ensemble_run, terminal_spread, EnsembleConfig, EnsembleResult,
    TerminalSpread,
};
pub use async_sim::{
    async_run, async_step, sample_delay, AsyncSimulator, DelayLaw, DelayModel, HistoryRing,
};
pub use error::{HeatError, Result};
pub use exec::{exec_run, ExecConfig, ExecMode, ExecOutcome};
pub use field::{
    cosine_init, l2_norm, linear_steady_state, total_heat, BoundaryCondition, TemperatureField,
};
pub use params::{derive_r, SolverParams};
pub use partition::PartitionSpec;
pub use rng::SplitMix64;
pub use sync::{sync_run, sync_step, Stride, Trajectory};
