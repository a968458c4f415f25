use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Worst-case bilinear data: `A = sqrt(c T + gamma_min^2 I)` with `T` the
/// `k x k` tridiagonal matrix (2 on the diagonal, -1 beside it),
/// `c = (gamma_max^2 - gamma_min^2) / 4`, and `b = 2 A^{-T} e_1`.
#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub k: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
}

impl LowerBoundInstance {
    pub fn new(k: usize, gamma_min: f64, gamma_max: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("lower-bound instance needs k >= 2"));
        }
        if !(gamma_min > 0.0 && gamma_min <= gamma_max && gamma_max.is_finite()) {
            return Err(Error::invalid("need 0 < gamma_min <= gamma_max"));
        }
        let kp1 = (k + 1) as f64;
        let scale = (gamma_max * gamma_max - gamma_min * gamma_min) / 4.0;
        // Closed-form eigenpairs of T: mu_j = 2 - 2cos(j pi/(k+1)),
        // s_j(i) = sqrt(2/(k+1)) sin(i j pi/(k+1)).
        let s = DMatrix::from_fn(k, k, |i, j| {
            (2.0 / kp1).sqrt() * (((i + 1) * (j + 1)) as f64 * std::f64::consts::PI / kp1).sin()
        });
        let root: Vec<f64> = (1..=k)
            .map(|j| {
                let mu = 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / kp1).cos();
                (scale * mu + gamma_min * gamma_min).sqrt()
            })
            .collect();
        let diag = DMatrix::from_diagonal(&DVector::from_vec(root.clone()));
        let inv = DMatrix::from_diagonal(&DVector::from_iterator(k, root.iter().map(|r| 1.0 / r)));
        let a = &s * diag * s.transpose();
        // A is symmetric, so A^{-T} e_1 = S diag(1/root) Sᵀ e_1.
        let b = (&s * inv * s.row(0).transpose()) * 2.0;
        Ok(Self {
            k,
            gamma_min,
            gamma_max,
            a,
            b: b.as_slice().to_vec(),
        })
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.a.clone().singular_values().iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiagonal(k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
    }

    #[test]
    fn two_by_two_spectrum() {
        let (gmin, gmax) = (1.0, 2.0);
        let inst = LowerBoundInstance::new(2, gmin, gmax).unwrap();
        let c = (gmax * gmax - gmin * gmin) / 4.0;
        let mut expect = [c * 1.0 + gmin * gmin, c * 3.0 + gmin * gmin];
        expect.sort_by(|a, b| b.total_cmp(a));
        let ata = inst.a.transpose() * &inst.a;
        let mut eig: Vec<f64> = ata.symmetric_eigenvalues().iter().cloned().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        for (e, x) in eig.iter().zip(expect) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn square_matches_definition() {
        let (gmin, gmax) = (0.1, 10.0);
        let k = 7;
        let inst = LowerBoundInstance::new(k, gmin, gmax).unwrap();
        let target = tridiagonal(k) * ((gmax * gmax - gmin * gmin) / 4.0) + DMatrix::identity(k, k) * gmin * gmin;
        assert!((&inst.a * &inst.a - target).norm() < 1e-10);
        let e1 = inst.a.transpose() * DVector::from_column_slice(&inst.b);
        assert!((e1[0] - 2.0).abs() < 1e-10);
        assert!(e1.iter().skip(1).all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn equal_gammas_give_scaled_identity() {
        let inst = LowerBoundInstance::new(4, 3.0, 3.0).unwrap();
        assert!((&inst.a - DMatrix::identity(4, 4) * 3.0).norm() < 1e-12);
    }

    #[test]
    fn singular_values_in_range() {
        for k in [2, 10, 50] {
            for (lo, hi) in [(1.0, 2.0), (0.1, 10.0)] {
                let inst = LowerBoundInstance::new(k, lo, hi).unwrap();
                for s in inst.singular_values() {
                    assert!(s >= lo - 1e-8 && s <= hi + 1e-8);
                }
            }
        }
    }
}
