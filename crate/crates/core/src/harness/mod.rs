//! Experiment orchestration behind the CLI: problem materialization, single
//! runs with trace output, fixed-period grid searches, the LP step-ratio
//! sweep, verification suites and the LP active-set diagnostic.

mod active_set;
mod grid;
mod problem;
mod run;
mod sweep;
pub mod verify;

pub use active_set::{active_state, last_active_set_change, ActiveSnapshot, AT_BOUND_TOL, SNAPSHOT_EVERY};
pub use grid::{grid_search, GridEntry, GridResult};
pub use problem::Problem;
pub use run::{cmd_run, run_experiment, Algorithm, ExperimentConfig, PolicySpec, RunRecord, RunSummary, StepConfig};
pub use sweep::{lp_ratio_sweep, ratio_steps, SweepEntry, SweepResult};

/// Exit code for a run that finished without reaching its residual target.
pub const EXIT_TARGET_UNMET: i32 = 2;
