use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::Problem;
use super::run::{run_experiment, ExperimentConfig, PolicySpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub period: usize,
    pub iterations_to_target: Option<usize>,
    pub final_residual: Option<f64>,
    pub restart_count: Option<usize>,
    /// Failure message when the run errored.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best_period: usize,
    /// False when no period met the target and the choice fell back to the
    /// smallest final residual.
    pub reached_target: bool,
    pub entries: Vec<GridEntry>,
}

/// Runs `Fixed(T)` for every period in parallel and picks the one reaching
/// the target in the fewest iterations, ties going to the smaller period.
pub fn grid_search(cfg: &ExperimentConfig, problem: &Problem, periods: &[usize]) -> Result<GridResult> {
    if periods.is_empty() {
        return Err(Error::invalid("period set is empty"));
    }
    let mut entries: Vec<GridEntry> = periods
        .par_iter()
        .map(|&period| {
            let mut c = cfg.clone();
            c.policy = PolicySpec::Fixed { period };
            match run_experiment(&c, problem) {
                Ok(rec) => GridEntry {
                    period,
                    iterations_to_target: rec.summary.iterations_to_target,
                    final_residual: Some(rec.summary.final_residual),
                    restart_count: Some(rec.summary.restart_count),
                    error: None,
                },
                Err(e) => GridEntry {
                    period,
                    iterations_to_target: None,
                    final_residual: None,
                    restart_count: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    entries.sort_by_key(|e| e.period);

    let reached = entries
        .iter()
        .filter_map(|e| e.iterations_to_target.map(|it| (it, e.period)))
        .min();
    if let Some((_, best_period)) = reached {
        return Ok(GridResult {
            best_period,
            reached_target: true,
            entries,
        });
    }
    let fallback = entries
        .iter()
        .filter_map(|e| e.final_residual.filter(|r| !r.is_nan()).map(|r| (r, e.period)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::invalid("every grid-search run failed"))?;
    Ok(GridResult {
        best_period: fallback.1,
        reached_target: false,
        entries,
    })
}
