//! Distance-based adaptive restarts for first-order methods.
//!
//! The crate wraps sublinearly convergent inner algorithms (PDHG,
//! extragradient, FISTA with backtracking) in a restart controller that
//! restarts whenever the normalized distance travelled since the last restart
//! has shrunk by a factor `beta` relative to the previous epoch. Around that
//! controller live the problem generators, the theory calculators used to
//! check run-time bounds, data ingestion, and the experiment harness driven
//! by the `adarestart` CLI.

// `!(x > 0.0)` is used throughout to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod io;
pub mod numerics;
pub mod problems;
pub mod restart;
pub mod saddle;
pub mod smooth;
pub mod theory;

pub use error::{Error, Result};
pub use restart::{
    potential, restart_triggered, run_restarted, run_restarted_with, InnerAlgorithm, IterInfo,
    NormSpec, PhiFunction, PrimalDualPoint, RestartController, RestartPolicy, RunOutput,
    SolverTrace, StoppingRule, TraceRow,
};
