use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth::CompositeObjective;

/// `f(x) = sum_i i h(x_i) + alpha/2 ||x||^2` with the one-sided Huber
/// function `h(s) = s^2/2` for `s >= -delta` and `-delta s - delta^2/2`
/// below. `f` is `(n + alpha)`-smooth, `alpha`-strongly convex, minimized at
/// the origin with value 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardExampleInstance {
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
}

impl HardExampleInstance {
    pub fn new(n: usize, delta: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("hard example needs n >= 1"));
        }
        if !(delta > 0.0) || !(alpha >= 0.0) {
            return Err(Error::invalid("hard example needs delta > 0 and alpha >= 0"));
        }
        Ok(Self { n, delta, alpha })
    }

    /// All coordinates at -1.
    pub fn start(&self) -> Vec<f64> {
        vec![-1.0; self.n]
    }

    pub fn optimal_value(&self) -> f64 {
        0.0
    }

    fn h(&self, s: f64) -> f64 {
        if s >= -self.delta {
            0.5 * s * s
        } else {
            -self.delta * s - 0.5 * self.delta * self.delta
        }
    }

    fn dh(&self, s: f64) -> f64 {
        if s >= -self.delta {
            s
        } else {
            -self.delta
        }
    }
}

impl CompositeObjective for HardExampleInstance {
    fn dim(&self) -> usize {
        self.n
    }

    fn smooth_value(&self, x: &[f64]) -> f64 {
        let mut f = 0.0;
        let mut sq = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            f += (i + 1) as f64 * self.h(xi);
            sq += xi * xi;
        }
        f + 0.5 * self.alpha * sq
    }

    fn smooth_gradient(&self, x: &[f64], out: &mut [f64]) {
        for (i, (&xi, o)) in x.iter().zip(out.iter_mut()).enumerate() {
            *o = (i + 1) as f64 * self.dh(xi) + self.alpha * xi;
        }
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.n as f64 + self.alpha)
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimizer_at_origin() {
        let f = HardExampleInstance::new(5, 0.1, 0.01).unwrap();
        assert_eq!(f.value(&[0.0; 5]), 0.0);
        assert_eq!(f.gradient(&[0.0; 5]), vec![0.0; 5]);
        assert_eq!(f.smoothness(), Some(5.01));
    }

    #[test]
    fn linear_branch_value() {
        let f = HardExampleInstance::new(1, 0.1, 0.0).unwrap();
        assert!((f.value(&[-1.0]) - 0.095).abs() < 1e-15);
        let g = HardExampleInstance::new(1, 0.1, 2.0).unwrap();
        assert!((g.value(&[-1.0]) - (0.095 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = HardExampleInstance::new(6, 0.1, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut checked = 0;
        while checked < 100 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            if x.iter().any(|&v| (v + 0.1).abs() < 1e-4) {
                continue;
            }
            let g = f.gradient(&x);
            for k in 0..6 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += 1e-6;
                xm[k] -= 1e-6;
                let fd = (f.value(&xp) - f.value(&xm)) / 2e-6;
                assert!((fd - g[k]).abs() < 1e-5);
            }
            checked += 1;
        }
    }
}
