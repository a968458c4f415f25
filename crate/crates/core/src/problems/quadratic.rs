use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::random_orthogonal;
use crate::error::{Error, Result};
use crate::numerics::dist2;
use crate::smooth::CompositeObjective;

/// `f(x) = 0.5 (x - x*)ᵀ H (x - x*)` with `H = Q diag(lambda) Qᵀ`; `f* = 0`.
#[derive(Clone, Debug)]
pub struct QuadraticInstance {
    h: DMatrix<f64>,
    x_star: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl QuadraticInstance {
    /// Eigenvalues log-spaced from `alpha` to `l` (both included), random
    /// rotation and a Gaussian minimizer.
    pub fn generate(n: usize, alpha: f64, l: f64, seed: u64) -> Result<Self> {
        if n < 2 || !(alpha > 0.0) || !(l >= alpha) {
            return Err(Error::invalid("quadratic needs n >= 2 and 0 < alpha <= L"));
        }
        let eig: Vec<f64> = (0..n)
            .map(|i| alpha * (l / alpha).powf(i as f64 / (n - 1) as f64))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(n, &mut rng);
        let x_star: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self::from_spectrum(&q, &eig, x_star))
    }

    pub fn from_spectrum(q: &DMatrix<f64>, eigenvalues: &[f64], x_star: Vec<f64>) -> Self {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues));
        let mut h = q * d * q.transpose();
        // Exact symmetry.
        h = (&h + h.transpose()) * 0.5;
        Self {
            h,
            x_star,
            eigenvalues: eigenvalues.to_vec(),
        }
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.x_star
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        dist2(x, &self.x_star)
    }

    fn shifted(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().zip(&self.x_star).map(|(a, b)| a - b))
    }
}

impl CompositeObjective for QuadraticInstance {
    fn dim(&self) -> usize {
        self.x_star.len()
    }

    fn smooth_value(&self, x: &[f64]) -> f64 {
        let d = self.shifted(x);
        0.5 * d.dot(&(&self.h * &d))
    }

    fn smooth_gradient(&self, x: &[f64], out: &mut [f64]) {
        let g = &self.h * self.shifted(x);
        out.copy_from_slice(g.as_slice());
    }

    fn smoothness(&self) -> Option<f64> {
        self.eigenvalues.iter().cloned().reduce(f64::max)
    }

    fn strong_convexity(&self) -> Option<f64> {
        self.eigenvalues.iter().cloned().reduce(f64::min)
    }
}
