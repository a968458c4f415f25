use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::active_set::{active_state, last_active_set_change, ActiveSnapshot, AT_BOUND_TOL, SNAPSHOT_EVERY};
use super::problem::Problem;
use super::sweep::ratio_steps;
use crate::error::{Error, Result};
use crate::io::{write_current_series, write_trace, InstanceFile};
use crate::restart::{
    run_restarted_with, InnerAlgorithm, PhiFunction, RestartPolicy, RunOptions, RunOutput, StoppingRule,
};
use crate::saddle::{AverageTarget, Extragradient, Pdhg};
use crate::smooth::{Agd, AgdConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pdhg,
    Extragradient,
    Agd,
}

/// Restart policy with the normalizer left to the algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    NoRestart,
    Fixed { period: usize },
    Adaptive { beta: f64, first_epoch: usize },
    FunctionScheme,
}

impl PolicySpec {
    pub fn resolve(self, phi: PhiFunction) -> RestartPolicy {
        match self {
            PolicySpec::NoRestart => RestartPolicy::NoRestart,
            PolicySpec::Fixed { period } => RestartPolicy::Fixed { period },
            PolicySpec::Adaptive { beta, first_epoch } => RestartPolicy::Adaptive {
                beta,
                phi,
                first_epoch,
            },
            PolicySpec::FunctionScheme => RestartPolicy::FunctionScheme,
        }
    }
}

/// Step-size settings. PDHG uses `gamma_y = scale / (sqrt(ratio) ||A||)`
/// and `gamma_x = ratio gamma_y` unless `gamma` fixes both; extragradient
/// uses `gamma` or `scale / ||A||`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Defaults to `sqrt(0.9)` for PDHG and 1 for extragradient.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default = "one")]
    pub ratio: f64,
    #[serde(default)]
    pub average: AverageTarget,
    #[serde(default)]
    pub agd: AgdConfig,
}

fn one() -> f64 {
    1.0
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            scale: None,
            ratio: 1.0,
            average: AverageTarget::default(),
            agd: AgdConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: InstanceFile,
    pub algorithm: Algorithm,
    pub policy: PolicySpec,
    #[serde(default)]
    pub steps: StepConfig,
    pub max_iters: usize,
    #[serde(default)]
    pub target: Option<f64>,
    /// Also record the residual of the raw iterate.
    #[serde(default)]
    pub track_current: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub algorithm: Algorithm,
    pub policy: RestartPolicy,
    pub iterations: usize,
    pub final_residual: f64,
    pub best_residual: f64,
    pub target: Option<f64>,
    pub reached_target: bool,
    pub iterations_to_target: Option<usize>,
    /// First iteration at which the raw iterate met the target.
    pub current_iterations_to_target: Option<usize>,
    pub restart_count: usize,
    pub epoch_lengths: Vec<usize>,
    pub step_primal: Option<f64>,
    pub step_dual: Option<f64>,
    /// Index of the last snapshot whose active set differs from the one
    /// before it (LP only).
    pub last_active_set_change: Option<usize>,
}

/// Everything produced by one run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub output: RunOutput,
    pub summary: RunSummary,
    pub active_sets: Vec<ActiveSnapshot>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::invalid("budget must be at least 1 iteration"));
        }
        if let Some(t) = self.target {
            if !(t >= 0.0) {
                return Err(Error::invalid("residual target must be nonnegative"));
            }
        }
        if !(self.steps.ratio > 0.0 && self.steps.ratio.is_finite()) {
            return Err(Error::invalid("step ratio must be positive"));
        }
        Ok(())
    }
}

struct Steps {
    primal: Option<f64>,
    dual: Option<f64>,
}

fn drive<A: InnerAlgorithm>(alg: &mut A, problem: &Problem, cfg: &ExperimentConfig, steps: Steps) -> Result<RunRecord> {
    let policy = cfg.policy.resolve(alg.default_phi());
    let stop = StoppingRule {
        max_iters: cfg.max_iters,
        target: cfg.target,
    };
    let options = RunOptions {
        track_current: cfg.track_current,
        ..RunOptions::default()
    };
    let start = problem.start();
    let lp = match problem {
        Problem::BoxLp(lp) => Some(lp),
        _ => None,
    };
    let mut active_sets = Vec::new();
    if let Some(lp) = lp {
        active_sets.push(ActiveSnapshot {
            iteration: 0,
            state: active_state(&start.x, &lp.bounds, AT_BOUND_TOL),
        });
    }
    let output = run_restarted_with(alg, start, &policy, &stop, |w| problem.residual(w), &options, |info, alg| {
        if let Some(lp) = lp {
            if info.restarted || info.total_iter % SNAPSHOT_EVERY == 0 {
                active_sets.push(ActiveSnapshot {
                    iteration: info.total_iter,
                    state: active_state(&alg.candidate().x, &lp.bounds, AT_BOUND_TOL),
                });
            }
        }
    })?;
    let trace = &output.trace;
    let summary = RunSummary {
        problem: problem.kind().to_string(),
        algorithm: cfg.algorithm,
        policy,
        iterations: output.iterations(),
        final_residual: trace.final_residual().unwrap_or(f64::NAN),
        best_residual: output.best_residual,
        target: cfg.target,
        reached_target: output.reached_target,
        iterations_to_target: cfg.target.and_then(|t| trace.first_below(t)),
        current_iterations_to_target: cfg.target.and_then(|t| trace.first_current_below(t)),
        restart_count: output.restart_count(),
        epoch_lengths: trace.epoch_lengths(),
        step_primal: steps.primal,
        step_dual: steps.dual,
        last_active_set_change: if active_sets.is_empty() {
            None
        } else {
            Some(last_active_set_change(&active_sets)?)
        },
    };
    Ok(RunRecord {
        output,
        summary,
        active_sets,
    })
}

/// Runs one experiment on an already materialized problem.
pub fn run_experiment(cfg: &ExperimentConfig, problem: &Problem) -> Result<RunRecord> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Pdhg => {
            let oracle = problem
                .saddle()
                .ok_or_else(|| Error::NotApplicable(format!("PDHG needs a saddle problem, got {}", problem.kind())))?;
            let l = problem.operator_norm()?;
            let (gx, gy) = match cfg.steps.gamma {
                Some(g) => (g, g),
                None => ratio_steps(cfg.steps.ratio, l, cfg.steps.scale.unwrap_or(0.9f64.sqrt()))?,
            };
            let mut alg = Pdhg::new(oracle, gx, gy, l)?;
            drive(&mut alg, problem, cfg, Steps { primal: Some(gx), dual: Some(gy) })
        }
        Algorithm::Extragradient => {
            let oracle = problem.saddle().ok_or_else(|| {
                Error::NotApplicable(format!("extragradient needs a saddle problem, got {}", problem.kind()))
            })?;
            let l = problem.operator_norm()?;
            let gamma = cfg.steps.gamma.unwrap_or(cfg.steps.scale.unwrap_or(1.0) / l);
            let mut alg = Extragradient::new(oracle, gamma, l, cfg.steps.average)?;
            drive(&mut alg, problem, cfg, Steps { primal: Some(gamma), dual: Some(gamma) })
        }
        Algorithm::Agd => {
            let obj = problem
                .objective()
                .ok_or_else(|| Error::NotApplicable(format!("AGD needs a smooth objective, got {}", problem.kind())))?;
            let mut alg = Agd::new(obj, cfg.steps.agd)?;
            drive(&mut alg, problem, cfg, Steps { primal: None, dual: None })
        }
    }
}

/// Runs the experiment and writes `trace.csv`, `series.csv`, `summary.json`
/// and, for LPs, `active_sets.json` into `out_dir`.
pub fn cmd_run(cfg: &ExperimentConfig, problem: &Problem, out_dir: &Path) -> Result<RunSummary> {
    let record = run_experiment(cfg, problem)?;
    fs::create_dir_all(out_dir)?;
    write_trace(&record.output.trace, BufWriter::new(File::create(out_dir.join("trace.csv"))?))?;
    write_current_series(&record.output.trace, BufWriter::new(File::create(out_dir.join("series.csv"))?))?;
    fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&record.summary)? + "\n")?;
    if !record.active_sets.is_empty() {
        fs::write(out_dir.join("active_sets.json"), serde_json::to_string(&record.active_sets)? + "\n")?;
    }
    Ok(record.summary)
}
