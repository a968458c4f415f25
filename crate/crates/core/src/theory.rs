//! Closed-form constants and bounds: epoch-length ceilings `t*`, condition
//! numbers, iteration budgets, and a checker for recorded epoch lengths.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::restart::SolverTrace;

/// Problem and algorithm constants entering the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    /// Smoothness or operator norm `L`.
    pub l: f64,
    /// Error-bound modulus.
    pub theta: f64,
    /// Strong convexity.
    pub alpha: f64,
    /// Backtracking factor.
    pub eta: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl TheoryConstants {
    /// `kappa_hat = C / theta` with PDHG's `C = 1/(2 gamma)`.
    pub fn kappa_hat_pdhg(&self) -> f64 {
        1.0 / (2.0 * self.gamma * self.theta)
    }

    /// Extragradient: `C = 2/gamma`.
    pub fn kappa_hat_extragradient(&self) -> f64 {
        2.0 / (self.gamma * self.theta)
    }

    /// `kappa_bar = L eta / alpha`.
    pub fn kappa_bar(&self) -> f64 {
        kappa_bar(self.l, self.eta, self.alpha)
    }

    /// AGD: `C = 2 L eta`, `theta = alpha / 2`, so `kappa_hat = 4 kappa_bar`.
    pub fn kappa_hat_agd(&self) -> f64 {
        4.0 * self.kappa_bar()
    }
}

pub fn kappa_bar(l: f64, eta: f64, alpha: f64) -> f64 {
    l * eta / alpha
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta must lie in (0, 1), got {beta}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// PDHG with `gamma_x = gamma_y = gamma`:
/// `t* = (1 + q)^2 (1 + beta)^2 / beta^2 / (2 gamma theta) + 2`,
/// `q = (1 - gamma^2 L^2)^{-1/2}`.
pub fn t_star_pdhg(gamma: f64, l: f64, theta: f64, beta: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    check_positive("theta", theta)?;
    check_beta(beta)?;
    if !(l >= 0.0) || gamma * l >= 1.0 {
        return Err(Error::invalid(format!("need gamma L < 1, got gamma = {gamma}, L = {l}")));
    }
    let q = (1.0 - gamma * gamma * l * l).powf(-0.5);
    let rho = (1.0 + beta) / beta;
    Ok((1.0 + q).powi(2) * rho * rho / (2.0 * gamma * theta) + 2.0)
}

/// Extragradient: `t* = 4 (1 + beta)^2 / (beta^2 gamma theta) + 2`.
pub fn t_star_extragradient(gamma: f64, theta: f64, beta: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    check_positive("theta", theta)?;
    check_beta(beta)?;
    let rho = (1.0 + beta) / beta;
    Ok(4.0 * rho * rho / (gamma * theta) + 2.0)
}

/// AGD: `t* = 1 + sqrt(kappa_hat) (rho + sqrt(rho^2 + 4 rho))`, `rho = (1 + beta)/beta`.
pub fn t_star_agd(kappa_hat: f64, beta: f64) -> Result<f64> {
    check_positive("kappa_hat", kappa_hat)?;
    check_beta(beta)?;
    let rho = (1.0 + beta) / beta;
    Ok(1.0 + kappa_hat.sqrt() * (rho + (rho * rho + 4.0 * rho).sqrt()))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Restarted PDHG (`gamma = 0.7/L`, `beta = 1/2`) iterations to shrink the
/// distance to the solution set by `epsilon`:
/// `57 (L/theta) ln(4/eps) + max{57 (L/theta) ln(max{1, 77 L/(theta tau1)}), 2 tau1}`.
pub fn iteration_budget_pdhg(l_over_theta: f64, epsilon: f64, tau1: usize) -> Result<f64> {
    check_positive("L/theta", l_over_theta)?;
    check_epsilon(epsilon)?;
    let tau1 = tau1.max(1) as f64;
    let head = 57.0 * l_over_theta * (4.0 / epsilon).ln();
    let warmup = 57.0 * l_over_theta * (77.0 * l_over_theta / tau1).max(1.0).ln();
    Ok(head + warmup.max(2.0 * tau1))
}

/// Restarted AGD (`beta = 1/4`):
/// `8.5 (sqrt(kb) + 1) ln(8/eps) + max{26 sqrt(kb) ln(12 sqrt(kb)/tau1), 2 tau1}`.
pub fn iteration_budget_agd(kappa_bar: f64, epsilon: f64, tau1: usize) -> Result<f64> {
    check_positive("kappa_bar", kappa_bar)?;
    check_epsilon(epsilon)?;
    let tau1 = tau1.max(1) as f64;
    let s = kappa_bar.sqrt();
    let head = 8.5 * (s + 1.0) * (8.0 / epsilon).ln();
    let warmup = 26.0 * s * (12.0 * s / tau1).ln();
    Ok(head + warmup.max(2.0 * tau1))
}

/// Fixed restart period minimizing the worst-case AGD bound, `2e sqrt(kappa_bar)`.
pub fn optimal_fixed_period(kappa_bar: f64) -> Result<f64> {
    if !(kappa_bar >= 1.0) {
        return Err(Error::invalid(format!("kappa_bar must be at least 1, got {kappa_bar}")));
    }
    Ok(2.0 * E * kappa_bar.sqrt())
}

/// Period quoted for the hard example, `e sqrt(n / alpha)`. Note the
/// constant is `e` rather than the `2e` of [`optimal_fixed_period`].
pub fn hard_example_period(n: usize, alpha: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    Ok(E * (n as f64 / alpha).sqrt())
}

/// `Q(t) = (2/(t+1)) sqrt(kappa_hat)`, the AGD distance-contraction factor.
pub fn agd_contraction_factor(t: f64, kappa_hat: f64) -> f64 {
    2.0 / (t + 1.0) * kappa_hat.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochBoundReport {
    pub passed: bool,
    pub epoch_lengths: Vec<usize>,
    /// `max{tau_1, ceil(t*)}`.
    pub epoch_cap: usize,
    /// Largest `tau_i - epoch_cap`; nonpositive when every epoch passes.
    pub worst_epoch_margin: f64,
    /// Largest `sum_{i<=n} tau_i - (t* n + 2 (tau_1 - t*)^+)` over prefixes.
    pub worst_sum_margin: f64,
}

/// Checks every completed epoch against `max{tau_1, ceil(t*)}` and every
/// prefix sum against `t* n + 2 (tau_1 - t*)^+`.
pub fn verify_epoch_bounds(trace: &SolverTrace, t_star: f64, tau1: usize) -> Result<EpochBoundReport> {
    check_positive("t*", t_star)?;
    Ok(check_epoch_lengths(trace.epoch_lengths(), t_star, tau1))
}

pub fn check_epoch_lengths(epoch_lengths: Vec<usize>, t_star: f64, tau1: usize) -> EpochBoundReport {
    let epoch_cap = tau1.max(t_star.ceil() as usize);
    let slack = 2.0 * (tau1 as f64 - t_star).max(0.0);
    let mut worst_epoch_margin = f64::NEG_INFINITY;
    let mut worst_sum_margin = f64::NEG_INFINITY;
    let mut sum = 0usize;
    for (i, &tau) in epoch_lengths.iter().enumerate() {
        worst_epoch_margin = worst_epoch_margin.max(tau as f64 - epoch_cap as f64);
        sum += tau;
        let bound = t_star * (i + 1) as f64 + slack;
        worst_sum_margin = worst_sum_margin.max(sum as f64 - bound);
    }
    EpochBoundReport {
        passed: worst_epoch_margin <= 0.0 && worst_sum_margin <= 0.0,
        epoch_lengths,
        epoch_cap,
        worst_epoch_margin,
        worst_sum_margin,
    }
}
