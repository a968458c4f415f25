use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::op_norm;
use crate::problems::BoxLpInstance;
use crate::restart::{run_restarted_with, PrimalDualPoint, RestartPolicy, RunOptions, StoppingRule};
use crate::saddle::Pdhg;

/// `gamma_y = scale / (sqrt(ratio) L)` and `gamma_x = ratio gamma_y`, so
/// that `gamma_x gamma_y L^2 = scale^2`.
pub fn ratio_steps(ratio: f64, op_norm: f64, scale: f64) -> Result<(f64, f64)> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::invalid(format!("step ratio must be positive, got {ratio}")));
    }
    if !(op_norm > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let dual = scale / (ratio.sqrt() * op_norm);
    Ok((ratio * dual, dual))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub ratio: f64,
    /// Combined residual of the final raw iterate.
    pub final_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub best_ratio: f64,
    pub step_primal: f64,
    pub step_dual: f64,
    pub entries: Vec<SweepEntry>,
}

/// Runs PDHG without restarts for `iters` iterations per ratio at
/// `gamma_x gamma_y ||A||^2 = 0.9` and keeps the ratio with the smallest
/// final combined residual (ties to the earlier ratio in the list).
pub fn lp_ratio_sweep(lp: &BoxLpInstance, ratios: &[f64], iters: usize) -> Result<SweepResult> {
    if ratios.is_empty() {
        return Err(Error::invalid("ratio set is empty"));
    }
    let l = op_norm(&lp.a, 1e-12, 100_000)?.value;
    let scale = 0.9f64.sqrt();
    let start = lp.default_start();
    let entries: Vec<SweepEntry> = ratios
        .par_iter()
        .map(|&ratio| match sweep_one(lp, &start, ratio, l, scale, iters) {
            Ok(r) => SweepEntry {
                ratio,
                final_residual: Some(r),
                error: None,
            },
            Err(e) => SweepEntry {
                ratio,
                final_residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let best = entries
        .iter()
        .filter_map(|e| e.final_residual.map(|r| (r, e.ratio)))
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| Error::invalid("every ratio-sweep run failed"))?;
    let (step_primal, step_dual) = ratio_steps(best.1, l, scale)?;
    Ok(SweepResult {
        best_ratio: best.1,
        step_primal,
        step_dual,
        entries,
    })
}

fn sweep_one(lp: &BoxLpInstance, start: &PrimalDualPoint, ratio: f64, l: f64, scale: f64, iters: usize) -> Result<f64> {
    let (gx, gy) = ratio_steps(ratio, l, scale)?;
    let mut alg = Pdhg::new(lp, gx, gy, l)?;
    let options = RunOptions {
        track_current: true,
        ..RunOptions::default()
    };
    let out = run_restarted_with(
        &mut alg,
        start.clone(),
        &RestartPolicy::NoRestart,
        &StoppingRule::budget(iters),
        |w| lp.residuals(w).combined,
        &options,
        |_, _| {},
    )?;
    let last = out.trace.rows.last().expect("budget is at least one iteration");
    Ok(last.current_residual.expect("current residual tracked"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio_gives_equal_steps() {
        let (gx, gy) = ratio_steps(1.0, 2.0, 0.9f64.sqrt()).unwrap();
        assert_eq!(gx, gy);
        assert!((gx - 0.9f64.sqrt() / 2.0).abs() < 1e-15);
        let (gx, gy) = ratio_steps(100.0, 3.0, 0.9f64.sqrt()).unwrap();
        assert!((gx * gy * 9.0 - 0.9).abs() < 1e-14);
        assert!((gx / gy - 100.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_deterministic() {
        let lp = BoxLpInstance::generate_transportation(3, 4, 2).unwrap();
        let a = lp_ratio_sweep(&lp, &[0.1, 1.0, 10.0], 200).unwrap();
        let b = lp_ratio_sweep(&lp, &[0.1, 1.0, 10.0], 200).unwrap();
        assert_eq!(a, b);
        let one = lp_ratio_sweep(&lp, &[1.0], 10).unwrap();
        assert_eq!(one.best_ratio, 1.0);
        assert_eq!(one.step_primal, one.step_dual);
    }
}
