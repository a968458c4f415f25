//! The generic restart loop and the contract an inner algorithm implements.
//!
//! An epoch starts by re-initializing the inner algorithm at the last restart
//! point `omega_{i-1}` and stepping it until the restart policy fires. Under
//! the adaptive policy a restart happens at inner iteration `t` of epoch
//! `i > 1` when
//!
//! ```text
//! ||w_i^t - omega_{i-1}|| / phi(t)  <=  beta * ||omega_{i-1} - omega_{i-2}|| / phi(tau_{i-1})
//! ```
//!
//! where `w_i^t` is the point the inner algorithm reports for its sublinear
//! rate (the running average for PDHG and extragradient, the prox iterate for
//! accelerated gradient) and `tau_{i-1}` is the length of the previous epoch.
//! The first epoch is cut after a configurable `tau_1` iterations.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::all_finite;

/// A point `w = (x, y)`; `y` is empty for pure minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PrimalDualPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn primal(x: Vec<f64>) -> Self {
        Self { x, y: Vec::new() }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; m],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.x) && all_finite(&self.y)
    }

    /// Plain Euclidean distance over both blocks.
    pub fn euclidean_distance(&self, other: &Self) -> f64 {
        NormSpec::euclidean().distance(self, other)
    }
}

/// Weighted Euclidean norm `sqrt(pw * ||x||^2 + dw * ||y||^2)`.
///
/// PDHG with unequal step sizes measures distances with weights
/// `1/gamma_x` and `1/gamma_y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub primal_weight: f64,
    pub dual_weight: f64,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self::euclidean()
    }
}

impl NormSpec {
    pub fn new(primal_weight: f64, dual_weight: f64) -> Result<Self> {
        if !(primal_weight > 0.0 && primal_weight.is_finite() && dual_weight > 0.0 && dual_weight.is_finite()) {
            return Err(Error::invalid("norm weights must be positive and finite"));
        }
        Ok(Self {
            primal_weight,
            dual_weight,
        })
    }

    pub const fn euclidean() -> Self {
        Self {
            primal_weight: 1.0,
            dual_weight: 1.0,
        }
    }

    pub fn from_step_sizes(gamma_x: f64, gamma_y: f64) -> Result<Self> {
        Self::new(1.0 / gamma_x, 1.0 / gamma_y)
    }

    pub fn norm(&self, w: &PrimalDualPoint) -> f64 {
        let sx: f64 = w.x.iter().map(|v| v * v).sum();
        let sy: f64 = w.y.iter().map(|v| v * v).sum();
        (self.primal_weight * sx + self.dual_weight * sy).sqrt()
    }

    pub fn distance(&self, a: &PrimalDualPoint, b: &PrimalDualPoint) -> f64 {
        debug_assert_eq!(a.dims(), b.dims());
        let sx: f64 = a.x.iter().zip(&b.x).map(|(p, q)| (p - q) * (p - q)).sum();
        let sy: f64 = a.y.iter().zip(&b.y).map(|(p, q)| (p - q) * (p - q)).sum();
        (self.primal_weight * sx + self.dual_weight * sy).sqrt()
    }
}

/// Normalizer matching the inner algorithm's sublinear rate: `t` for PDHG and
/// extragradient, `(t + 1)^2` for accelerated gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiFunction {
    Linear,
    ShiftedSquare,
}

impl PhiFunction {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            PhiFunction::Linear => t,
            PhiFunction::ShiftedSquare => (t + 1.0) * (t + 1.0),
        }
    }
}

/// `dist / phi(t)`.
pub fn potential(dist: f64, t: usize, phi: PhiFunction) -> Result<f64> {
    if t < 1 {
        return Err(Error::invalid("potential requires t >= 1"));
    }
    Ok(dist / phi.eval(t as f64))
}

/// The adaptive restart test. Ties restart, so a stationary inner algorithm
/// (`dist_cur = dist_prev = 0`) triggers.
pub fn restart_triggered(
    dist_cur: f64,
    t: usize,
    dist_prev: f64,
    tau_prev: usize,
    beta: f64,
    phi: PhiFunction,
) -> bool {
    debug_assert!(t >= 1 && tau_prev >= 1);
    dist_cur / phi.eval(t as f64) <= beta * dist_prev / phi.eval(tau_prev as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RestartPolicy {
    NoRestart,
    Fixed {
        period: usize,
    },
    Adaptive {
        beta: f64,
        phi: PhiFunction,
        /// Length of the first epoch, `tau_1`.
        first_epoch: usize,
    },
    /// Restart whenever the objective increases between consecutive iterates.
    FunctionScheme,
}

impl RestartPolicy {
    pub fn adaptive(beta: f64, phi: PhiFunction) -> Self {
        RestartPolicy::Adaptive {
            beta,
            phi,
            first_epoch: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RestartPolicy::Fixed { period } if period < 1 => {
                Err(Error::invalid("fixed restart period must be at least 1"))
            }
            RestartPolicy::Adaptive {
                beta, first_epoch, ..
            } => {
                if !(beta > 0.0 && beta < 1.0) {
                    Err(Error::invalid(format!("beta must lie in (0, 1), got {beta}")))
                } else if first_epoch < 1 {
                    Err(Error::invalid("first epoch length must be at least 1"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Iteration budget and optional residual target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub max_iters: usize,
    pub target: Option<f64>,
}

impl StoppingRule {
    pub fn budget(max_iters: usize) -> Self {
        Self {
            max_iters,
            target: None,
        }
    }

    pub fn with_target(max_iters: usize, target: f64) -> Self {
        Self {
            max_iters,
            target: Some(target),
        }
    }
}

/// One inner iteration of a restarted run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub total_iter: usize,
    pub epoch: usize,
    pub inner_iter: usize,
    /// Residual of the restart candidate.
    pub residual: f64,
    pub potential: Option<f64>,
    pub restarted: bool,
    /// Residual of the latest raw iterate, when requested.
    pub current_residual: Option<f64>,
    /// Seconds since the start of the run, when requested.
    pub elapsed: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Lengths of the epochs that ended in a restart.
    pub fn epoch_lengths(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.restarted)
            .map(|r| r.inner_iter)
            .collect()
    }

    pub fn restart_iterations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.restarted)
            .map(|r| r.total_iter)
            .collect()
    }

    /// First total iteration whose candidate residual is at most `target`.
    pub fn first_below(&self, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.residual <= target)
            .map(|r| r.total_iter)
    }

    /// First total iteration whose raw-iterate residual is at most `target`.
    pub fn first_current_below(&self, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.current_residual.is_some_and(|c| c <= target))
            .map(|r| r.total_iter)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.rows.last().map(|r| r.residual)
    }

    /// Checks the structural invariants: strictly increasing iteration
    /// counter, nondecreasing epoch, and restart flags exactly where the
    /// epoch changes.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        for pair in self.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if b.total_iter <= a.total_iter {
                return Err(format!("total_iter not increasing at {}", b.total_iter));
            }
            if b.epoch < a.epoch {
                return Err(format!("epoch decreased at {}", b.total_iter));
            }
            if a.restarted != (b.epoch == a.epoch + 1) {
                return Err(format!("restart flag inconsistent at {}", a.total_iter));
            }
            if b.epoch > a.epoch + 1 {
                return Err(format!("epoch skipped at {}", b.total_iter));
            }
            if (b.epoch == a.epoch && b.inner_iter != a.inner_iter + 1) || (b.epoch != a.epoch && b.inner_iter != 1) {
                return Err(format!("inner_iter inconsistent at {}", b.total_iter));
            }
        }
        Ok(())
    }
}

/// What [`run_restarted`] needs from an inner algorithm.
///
/// The algorithm owns a reference to its (immutable) problem; the restart loop
/// only sees points.
pub trait InnerAlgorithm {
    /// Resets the internal state to start a new epoch at `omega`.
    fn initialize(&mut self, omega: &PrimalDualPoint) -> Result<()>;

    fn step(&mut self) -> Result<()>;

    /// The point whose sublinear rate the algorithm guarantees, `w_i^t`.
    fn candidate(&self) -> &PrimalDualPoint;

    /// The latest raw iterate (the `u` iterate for saddle methods).
    fn current(&self) -> &PrimalDualPoint;

    /// Norm used for restart distances.
    fn norm(&self) -> NormSpec {
        NormSpec::euclidean()
    }

    /// The rate normalizer this algorithm's analysis uses.
    fn default_phi(&self) -> PhiFunction;

    /// Objective value at `w`, for algorithms that minimize a function.
    fn objective(&self, _w: &PrimalDualPoint) -> Option<f64> {
        None
    }
}

/// The restart state: last two restart points, last epoch length, the inner
/// counter and the epoch index.
#[derive(Clone, Debug)]
pub struct RestartController {
    policy: RestartPolicy,
    norm: NormSpec,
    omega_prev: PrimalDualPoint,
    omega_prev2: Option<PrimalDualPoint>,
    /// `||omega_{i-1} - omega_{i-2}||`, cached at the last restart.
    prev_dist: f64,
    tau_prev: usize,
    t: usize,
    epoch: usize,
    f_prev: Option<f64>,
}

/// Outcome of observing one inner iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub restart: bool,
    pub potential: Option<f64>,
}

impl RestartController {
    pub fn new(policy: RestartPolicy, norm: NormSpec, omega0: PrimalDualPoint) -> Result<Self> {
        policy.validate()?;
        Ok(Self {
            policy,
            norm,
            omega_prev: omega0,
            omega_prev2: None,
            prev_dist: 0.0,
            tau_prev: 0,
            t: 0,
            epoch: 1,
            f_prev: None,
        })
    }

    pub fn policy(&self) -> &RestartPolicy {
        &self.policy
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn inner_iter(&self) -> usize {
        self.t
    }

    pub fn tau_prev(&self) -> usize {
        self.tau_prev
    }

    pub fn omega_prev(&self) -> &PrimalDualPoint {
        &self.omega_prev
    }

    pub fn omega_prev2(&self) -> Option<&PrimalDualPoint> {
        self.omega_prev2.as_ref()
    }

    /// Sets the objective at the epoch start, used by the function scheme.
    pub fn set_epoch_objective(&mut self, f: Option<f64>) {
        self.f_prev = f;
    }

    /// Advances the inner counter and decides whether `candidate` ends the
    /// epoch. Does not change the restart points; call [`commit`] for that.
    ///
    /// [`commit`]: RestartController::commit
    pub fn observe(&mut self, candidate: &PrimalDualPoint, objective: Option<f64>) -> Result<Decision> {
        self.t += 1;
        let t = self.t;
        let decision = match self.policy {
            RestartPolicy::NoRestart => Decision {
                restart: false,
                potential: None,
            },
            RestartPolicy::Fixed { period } => Decision {
                restart: t >= period,
                potential: None,
            },
            RestartPolicy::Adaptive {
                beta,
                phi,
                first_epoch,
            } => {
                let dist = self.norm.distance(candidate, &self.omega_prev);
                let pot = potential(dist, t, phi)?;
                let restart = if self.epoch == 1 {
                    t >= first_epoch
                } else {
                    restart_triggered(dist, t, self.prev_dist, self.tau_prev, beta, phi)
                };
                Decision {
                    restart,
                    potential: Some(pot),
                }
            }
            RestartPolicy::FunctionScheme => {
                let f_curr = objective.ok_or_else(|| {
                    Error::NotApplicable("function-scheme restarts need an objective".into())
                })?;
                let restart = match self.f_prev {
                    Some(f_prev) => crate::smooth::function_scheme_triggered(f_curr, f_prev),
                    None => false,
                };
                self.f_prev = Some(f_curr);
                Decision {
                    restart,
                    potential: None,
                }
            }
        };
        Ok(decision)
    }

    /// Ends the current epoch at `candidate`: `tau_i <- t`, `omega_i <- candidate`.
    pub fn commit(&mut self, candidate: &PrimalDualPoint) {
        let dist = self.norm.distance(candidate, &self.omega_prev);
        let old = std::mem::replace(&mut self.omega_prev, candidate.clone());
        self.omega_prev2 = Some(old);
        self.prev_dist = dist;
        self.tau_prev = self.t;
        self.t = 0;
        self.epoch += 1;
    }
}

/// Per-iteration view handed to observers.
pub struct IterInfo<'a> {
    pub total_iter: usize,
    pub epoch: usize,
    pub inner_iter: usize,
    pub residual: f64,
    pub restarted: bool,
    /// `omega_{i-1}`, the start of the epoch this iteration belongs to.
    pub epoch_start: &'a PrimalDualPoint,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Also evaluate the residual at the raw iterate every iteration.
    pub track_current: bool,
    /// Keep every restart point `omega_0, omega_1, ...` in the output.
    pub keep_restart_points: bool,
    /// Record elapsed wall time per row. Breaks byte-for-byte reproducibility.
    pub record_time: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Candidate with the smallest recorded residual.
    pub best: PrimalDualPoint,
    pub best_residual: f64,
    pub best_iter: usize,
    /// Candidate at the final iteration.
    pub last: PrimalDualPoint,
    pub trace: SolverTrace,
    /// `omega_0, omega_1, ...` when requested, otherwise just `omega_0`.
    pub restart_points: Vec<PrimalDualPoint>,
    pub reached_target: bool,
}

impl RunOutput {
    pub fn iterations(&self) -> usize {
        self.trace.rows.last().map_or(0, |r| r.total_iter)
    }

    pub fn restart_count(&self) -> usize {
        self.trace.rows.iter().filter(|r| r.restarted).count()
    }
}

/// Runs `alg` under `policy` from `omega0` until the budget is spent or the
/// candidate residual reaches the target.
pub fn run_restarted<A, R>(
    alg: &mut A,
    omega0: PrimalDualPoint,
    policy: &RestartPolicy,
    stop: &StoppingRule,
    residual: R,
) -> Result<RunOutput>
where
    A: InnerAlgorithm,
    R: FnMut(&PrimalDualPoint) -> f64,
{
    let options = RunOptions {
        keep_restart_points: true,
        ..RunOptions::default()
    };
    run_restarted_with(alg, omega0, policy, stop, residual, &options, |_, _| {})
}

/// [`run_restarted`] with options and a per-iteration observer. The observer
/// runs after the step and the restart decision, before the epoch rolls over.
pub fn run_restarted_with<A, R, O>(
    alg: &mut A,
    omega0: PrimalDualPoint,
    policy: &RestartPolicy,
    stop: &StoppingRule,
    mut residual: R,
    options: &RunOptions,
    mut observer: O,
) -> Result<RunOutput>
where
    A: InnerAlgorithm,
    R: FnMut(&PrimalDualPoint) -> f64,
    O: FnMut(&IterInfo<'_>, &A),
{
    if stop.max_iters == 0 {
        return Err(Error::invalid("iteration budget must be at least 1"));
    }
    if !omega0.is_finite() {
        return Err(Error::invalid("starting point has non-finite entries"));
    }
    let started = Instant::now();
    let mut ctl = RestartController::new(*policy, alg.norm(), omega0.clone())?;
    alg.initialize(&omega0)?;
    if matches!(policy, RestartPolicy::FunctionScheme) {
        ctl.set_epoch_objective(alg.objective(&omega0));
    }

    let mut trace = SolverTrace::default();
    let mut restart_points = vec![omega0.clone()];
    let mut best = omega0;
    let mut best_residual = f64::INFINITY;
    let mut best_iter = 0;
    let mut reached_target = false;

    for total in 1..=stop.max_iters {
        alg.step()?;
        let candidate = alg.candidate();
        let res = residual(candidate);
        if !candidate.is_finite() || !res.is_finite() {
            return Err(Error::Divergence {
                iteration: total,
                trace: Box::new(trace),
            });
        }
        let objective = if matches!(policy, RestartPolicy::FunctionScheme) {
            alg.objective(candidate)
        } else {
            None
        };
        let decision = ctl.observe(candidate, objective)?;
        let current_residual = options.track_current.then(|| residual(alg.current()));
        trace.rows.push(TraceRow {
            total_iter: total,
            epoch: ctl.epoch(),
            inner_iter: ctl.inner_iter(),
            residual: res,
            potential: decision.potential,
            restarted: decision.restart,
            current_residual,
            elapsed: options.record_time.then(|| started.elapsed().as_secs_f64()),
        });
        if res < best_residual {
            best_residual = res;
            best_iter = total;
            best.clone_from(candidate);
        }
        observer(
            &IterInfo {
                total_iter: total,
                epoch: ctl.epoch(),
                inner_iter: ctl.inner_iter(),
                residual: res,
                restarted: decision.restart,
                epoch_start: ctl.omega_prev(),
            },
            alg,
        );
        let done = stop.target.is_some_and(|target| res <= target);
        if decision.restart {
            let candidate = alg.candidate().clone();
            ctl.commit(&candidate);
            if options.keep_restart_points {
                restart_points.push(candidate.clone());
            }
            if !done && total < stop.max_iters {
                alg.initialize(&candidate)?;
                if matches!(policy, RestartPolicy::FunctionScheme) {
                    ctl.set_epoch_objective(objective);
                }
            }
        }
        if done {
            reached_target = true;
            break;
        }
    }

    Ok(RunOutput {
        best,
        best_residual,
        best_iter,
        last: alg.candidate().clone(),
        trace,
        restart_points,
        reached_target,
    })
}
