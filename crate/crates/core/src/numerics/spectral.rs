use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::{dot, norm2, SparseMatrix};

/// Relative numerical-rank cutoff used when the caller has no better value.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const POWER_ITERATION_SEED: u64 = 0x0d1_5eed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpNormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Estimates `||A||_2` by power iteration on `AᵀA` from a fixed pseudo-random
/// start vector.
///
/// Stops once the eigen-residual `||AᵀA v - λ v||` drops below `tol * λ`;
/// otherwise returns the last estimate with `converged = false`.
pub fn op_norm(a: &SparseMatrix, tol: f64, max_iter: usize) -> Result<OpNormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("op_norm tolerance must be positive"));
    }
    if a.is_zero() || a.ncols() == 0 {
        return Err(Error::invalid("op_norm of a zero matrix"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);
    let mut v: Vec<f64> = (0..a.ncols()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut av = vec![0.0; a.nrows()];
    let mut atav = vec![0.0; a.ncols()];
    let mut lambda = 0.0;
    for k in 1..=max_iter.max(1) {
        a.mul_vec_into(&v, &mut av);
        a.mul_vec_transpose_into(&av, &mut atav);
        lambda = dot(&av, &av);
        let residual = atav
            .iter()
            .zip(&v)
            .map(|(z, x)| (z - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol * lambda {
            return Ok(OpNormEstimate {
                value: lambda.sqrt(),
                converged: true,
                iterations: k,
            });
        }
        let nz = norm2(&atav);
        if nz == 0.0 {
            break;
        }
        v.iter_mut().zip(&atav).for_each(|(x, z)| *x = z / nz);
    }
    Ok(OpNormEstimate {
        value: lambda.sqrt(),
        converged: false,
        iterations: max_iter,
    })
}

/// All singular values, descending, from a dense SVD.
pub fn singular_values(a: &SparseMatrix) -> Vec<f64> {
    dense_singular_values(&a.to_dense())
}

pub(crate) fn dense_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let sv: DVector<f64> = a.clone().svd(false, false).singular_values;
    let mut out: Vec<f64> = sv.iter().copied().collect();
    out.sort_unstable_by(|x, y| y.total_cmp(x));
    out
}

/// Smallest singular value above `rank_tol * sigma_max`.
pub fn min_nonzero_singular_value(a: &SparseMatrix, rank_tol: f64) -> Result<f64> {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    sv.into_iter().rfind(|&s| s > rank_tol * smax)
        .ok_or(Error::ZeroMatrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn gaussian(m: usize, n: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
        SparseMatrix::from_dense(&d).unwrap()
    }

    #[test]
    fn op_norm_diagonal() {
        let a = SparseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let est = op_norm(&a, 1e-10, 1000).unwrap();
        assert!(est.converged);
        assert!((est.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn op_norm_rank_one() {
        let a = SparseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let est = op_norm(&a, 1e-12, 100).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_matches_dense_svd_on_gaussian() {
        let a = gaussian(50, 40, 0);
        let est = op_norm(&a, 1e-6, 100_000).unwrap();
        let smax = singular_values(&a)[0];
        assert!(((est.value - smax) / smax).abs() < 1e-3);
    }

    #[test]
    fn op_norm_rejects_zero() {
        assert!(op_norm(&SparseMatrix::zeros(2, 2), 1e-6, 10).is_err());
    }

    #[test]
    fn op_norm_unconverged_flag() {
        let a = gaussian(30, 30, 3);
        let est = op_norm(&a, 1e-15, 2).unwrap();
        assert!(!est.converged);
        assert!(est.value > 0.0);
    }

    #[test]
    fn op_norm_below_holder_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (m, n) = (rng.random_range(2..30), rng.random_range(2..30));
            let mut t = Vec::new();
            for i in 0..m {
                for j in 0..n {
                    if rng.random::<f64>() < 0.2 {
                        t.push((i, j, rng.random_range(-2.0..2.0)));
                    }
                }
            }
            t.push((0, 0, 1.0));
            let a = SparseMatrix::from_triplets(m, n, &t).unwrap();
            let est = op_norm(&a, 1e-8, 10_000).unwrap();
            assert!(est.value <= (a.norm_one() * a.norm_inf()).sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn min_singular_examples() {
        let a = SparseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((min_nonzero_singular_value(&a, DEFAULT_RANK_TOL).unwrap() - 1.0).abs() < 1e-12);
        let b = SparseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!((min_nonzero_singular_value(&b, 1e-10).unwrap() - 2.0).abs() < 1e-12);
        // Singular values of the all-ones 2x2 matrix are 2 and 0.
        let c = SparseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((min_nonzero_singular_value(&c, DEFAULT_RANK_TOL).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            min_nonzero_singular_value(&SparseMatrix::zeros(2, 2), DEFAULT_RANK_TOL),
            Err(Error::ZeroMatrix)
        ));
    }
}
