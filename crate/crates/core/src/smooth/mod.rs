//! Accelerated proximal gradient (FISTA with backtracking) for composite
//! objectives `f = a + b`, restartable under every policy.

mod agd;

pub use agd::{agd_sublinear_check, Agd, AgdConfig, AgdState, SublinearReport, MAX_BACKTRACKS};

/// `f = a + b` with `a` smooth and `b` proximable.
pub trait CompositeObjective: Sync {
    fn dim(&self) -> usize;

    fn smooth_value(&self, x: &[f64]) -> f64;

    /// Writes `grad a(x)` into `out`.
    fn smooth_gradient(&self, x: &[f64], out: &mut [f64]);

    fn nonsmooth_value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    /// Overwrites `z` with `argmin_x b(x) + ||x - z||^2 / (2 step)`.
    fn prox(&self, _z: &mut [f64], _step: f64) {}

    /// Lipschitz constant of `grad a`, when known.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// Strong-convexity modulus of `f`, when known.
    fn strong_convexity(&self) -> Option<f64> {
        None
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.smooth_value(x) + self.nonsmooth_value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.smooth_gradient(x, &mut g);
        g
    }
}

/// Function-scheme restart test: restart iff the objective went up. Ties do not restart.
pub fn function_scheme_triggered(f_curr: f64, f_prev: f64) -> bool {
    f_curr > f_prev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_scheme_is_strict() {
        assert!(!function_scheme_triggered(1.0, 2.0));
        assert!(function_scheme_triggered(2.0, 1.0));
        assert!(!function_scheme_triggered(1.0, 1.0));
    }
}
