use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::random_orthogonal;
use crate::error::{Error, Result};
use crate::numerics::{norm2, SparseMatrix, DEFAULT_RANK_TOL};
use crate::restart::PrimalDualPoint;
use crate::saddle::SaddleOracle;

/// `min_x max_y cᵀx + yᵀAx + bᵀy` over the whole space, with a saddle point.
///
/// The solution set is `(x* + ker A) x (y* + ker Aᵀ)`; the instance keeps
/// orthonormal bases of the row and column spaces of `A` to measure distances
/// to it.
#[derive(Clone, Debug)]
pub struct BilinearInstance {
    a: SparseMatrix,
    dense: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    x_star: Vec<f64>,
    y_star: Vec<f64>,
    /// `n x r`, spans the row space of `A`.
    row_basis: DMatrix<f64>,
    /// `m x r`, spans the column space of `A`.
    col_basis: DMatrix<f64>,
    sigma_min: f64,
    op_norm: f64,
}

impl BilinearInstance {
    /// `A = U diag(sigma) Vᵀ` with Haar-random `U`, `V` and the given nonzero
    /// singular values (`rank = sigma.len()`); `x*`, `y*` are Gaussian and
    /// `c = -Aᵀy*`, `b = -Ax*`.
    pub fn generate(m: usize, n: usize, sigma: &[f64], seed: u64) -> Result<Self> {
        if sigma.is_empty() || sigma.len() > m.min(n) {
            return Err(Error::invalid(format!(
                "need between 1 and {} singular values, got {}",
                m.min(n),
                sigma.len()
            )));
        }
        if sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("singular values must be positive and finite"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthogonal(m, &mut rng);
        let v = random_orthogonal(n, &mut rng);
        let r = sigma.len();
        let a = u.columns(0, r) * DMatrix::from_diagonal(&DVector::from_column_slice(sigma)) * v.columns(0, r).transpose();
        let x_star = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y_star = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let c = -(a.transpose() * y_star);
        let b = -(&a * x_star);
        Self::from_parts(a, b.as_slice().to_vec(), c.as_slice().to_vec())
    }

    /// Random instance of the given rank with singular values uniform on `[0.1, 1]`.
    pub fn generate_random(m: usize, n: usize, rank: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5167);
        let sigma: Vec<f64> = (0..rank).map(|_| rng.random_range(0.1..1.0)).collect();
        Self::generate(m, n, &sigma, seed)
    }

    /// Builds the instance from data; fails when no saddle point exists,
    /// i.e. when `b` is not in the range of `A` or `c` not in that of `Aᵀ`.
    pub fn from_parts(a: DMatrix<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if b.len() != m || c.len() != n {
            return Err(Error::invalid("bilinear instance shapes disagree"));
        }
        let svd = a.clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested Vᵀ");
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > DEFAULT_RANK_TOL * smax)
            .collect();
        let r = keep.len();
        let row_basis = DMatrix::from_fn(n, r, |i, k| vt[(keep[k], i)]);
        let col_basis = DMatrix::from_fn(m, r, |i, k| u[(i, keep[k])]);
        let sigma_min = keep.iter().map(|&i| svd.singular_values[i]).fold(f64::INFINITY, f64::min);

        let bv = DVector::from_column_slice(&b);
        let cv = DVector::from_column_slice(&c);
        // Minimum-norm solutions of Ax = -b and Aᵀy = -c.
        let inv_s = DVector::from_iterator(r, keep.iter().map(|&i| 1.0 / svd.singular_values[i]));
        let x_star = -(&row_basis * inv_s.component_mul(&(col_basis.transpose() * &bv)));
        let y_star = -(&col_basis * inv_s.component_mul(&(row_basis.transpose() * &cv)));
        let tol = 1e-9 * smax * (1.0 + bv.norm().max(cv.norm()));
        if (&a * &x_star + &bv).norm() > tol || (a.transpose() * &y_star + &cv).norm() > tol {
            return Err(Error::NotApplicable(
                "b or c lies outside the range of A; the game has no saddle point".into(),
            ));
        }
        Ok(Self {
            a: SparseMatrix::from_dense(&a)?,
            dense: a,
            b,
            c,
            x_star: x_star.as_slice().to_vec(),
            y_star: y_star.as_slice().to_vec(),
            row_basis,
            col_basis,
            sigma_min,
            op_norm: smax,
        })
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn rank(&self) -> usize {
        self.row_basis.ncols()
    }

    /// Smallest nonzero singular value; the error-bound modulus.
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// Minimum-norm saddle point.
    pub fn saddle_point(&self) -> PrimalDualPoint {
        PrimalDualPoint::new(self.x_star.clone(), self.y_star.clone())
    }

    /// `(Aᵀy + c, Ax + b)`, the gradient of the gap function at `w`.
    fn kkt(&self, w: &PrimalDualPoint) -> (Vec<f64>, Vec<f64>) {
        let mut gx = self.a.mul_vec_transpose(&w.y);
        gx.iter_mut().zip(&self.c).for_each(|(g, c)| *g += c);
        let mut gy = self.a.mul_vec(&w.x);
        gy.iter_mut().zip(&self.b).for_each(|(g, b)| *g += b);
        (gx, gy)
    }

    /// Localized duality gap over the ball of radius `r` around `w`, in
    /// closed form `r ||(Aᵀw_y + c, Aw_x + b)||`.
    pub fn localized_gap(&self, w: &PrimalDualPoint, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        let (gx, gy) = self.kkt(w);
        Ok(r * (norm2(&gx).powi(2) + norm2(&gy).powi(2)).sqrt())
    }

    /// Euclidean distance from `w` to the solution set.
    pub fn distance_to_solution_set(&self, w: &PrimalDualPoint) -> f64 {
        let dx = DVector::from_iterator(w.x.len(), w.x.iter().zip(&self.x_star).map(|(a, b)| a - b));
        let dy = DVector::from_iterator(w.y.len(), w.y.iter().zip(&self.y_star).map(|(a, b)| a - b));
        let px = self.row_basis.transpose() * dx;
        let py = self.col_basis.transpose() * dy;
        (px.norm_squared() + py.norm_squared()).sqrt()
    }
}

impl SaddleOracle for BilinearInstance {
    fn operator(&self) -> &SparseMatrix {
        &self.a
    }

    fn prox_primal(&self, z: &mut [f64], gamma: f64) -> Result<()> {
        z.iter_mut().zip(&self.c).for_each(|(v, c)| *v -= gamma * c);
        Ok(())
    }

    fn prox_dual(&self, z: &mut [f64], gamma: f64) -> Result<()> {
        z.iter_mut().zip(&self.b).for_each(|(v, b)| *v += gamma * b);
        Ok(())
    }

    fn monotone_map(&self, w: &PrimalDualPoint) -> PrimalDualPoint {
        let (gx, mut gy) = self.kkt(w);
        gy.iter_mut().for_each(|g| *g = -*g);
        PrimalDualPoint::new(gx, gy)
    }

    fn project(&self, _w: &mut PrimalDualPoint) -> Result<()> {
        Ok(())
    }

    fn is_feasible(&self, w: &PrimalDualPoint, _tol: f64) -> bool {
        w.dims() == (self.a.ncols(), self.a.nrows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_point(inst: &BilinearInstance, rng: &mut ChaCha8Rng) -> PrimalDualPoint {
        let (m, n) = inst.dense().shape();
        PrimalDualPoint::new(
            (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            (0..m).map(|_| rng.sample(StandardNormal)).collect(),
        )
    }

    #[test]
    fn saddle_point_has_zero_gap_and_distance() {
        let inst = BilinearInstance::generate_random(6, 4, 3, 1).unwrap();
        let w = inst.saddle_point();
        assert!(inst.localized_gap(&w, 3.0).unwrap() < 1e-12);
        assert!(inst.distance_to_solution_set(&w) < 1e-12);
        assert_eq!(inst.rank(), 3);
    }

    #[test]
    fn scalar_examples() {
        let inst = BilinearInstance::from_parts(DMatrix::from_element(1, 1, 1.0), vec![0.0], vec![0.0]).unwrap();
        let w = PrimalDualPoint::new(vec![1.0], vec![0.0]);
        assert_eq!(inst.localized_gap(&w, 2.0).unwrap(), 2.0);
        let w = PrimalDualPoint::new(vec![3.0], vec![4.0]);
        assert!((inst.distance_to_solution_set(&w) - 5.0).abs() < 1e-14);
        assert!(inst.localized_gap(&w, 0.0).is_err());
    }

    #[test]
    fn inconsistent_data_has_no_saddle_point() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            BilinearInstance::from_parts(a, vec![0.0, 1.0], vec![0.0, 0.0]),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn gap_matches_transcription_and_sampling() {
        let inst = BilinearInstance::generate_random(4, 3, 3, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = random_point(&inst, &mut rng);
        let r = 0.7;
        let a = inst.dense();
        let f = |x: &[f64], y: &[f64]| {
            let mut v = 0.0;
            for j in 0..3 {
                v += inst.c()[j] * x[j];
            }
            for i in 0..4 {
                v += inst.b()[i] * y[i];
                for j in 0..3 {
                    v += y[i] * a[(i, j)] * x[j];
                }
            }
            v
        };
        // Transcription: gradient of (x, y) -> f(w_x, y) - f(x, w_y), norm times r.
        let mut grad = [0.0; 7];
        for j in 0..3 {
            grad[j] = -(inst.c()[j] + (0..4).map(|i| a[(i, j)] * w.y[i]).sum::<f64>());
        }
        for i in 0..4 {
            grad[3 + i] = inst.b()[i] + (0..3).map(|j| a[(i, j)] * w.x[j]).sum::<f64>();
        }
        let exact = r * grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let gap = inst.localized_gap(&w, r).unwrap();
        assert!((gap - exact).abs() < 1e-12 * exact.max(1.0));

        let mut best = f64::NEG_INFINITY;
        for _ in 0..100_000 {
            let dir: Vec<f64> = (0..7).map(|_| rng.sample(StandardNormal)).collect();
            let nd = norm2(&dir);
            let rad = r * rng.random::<f64>().powf(1.0 / 7.0);
            let p: Vec<f64> = (0..7)
                .map(|k| {
                    let base = if k < 3 { w.x[k] } else { w.y[k - 3] };
                    base + rad * dir[k] / nd
                })
                .collect();
            let val = f(&w.x, &p[3..]) - f(&p[..3], &w.y);
            best = best.max(val);
        }
        assert!(best <= gap + 1e-12);
        assert!(best >= 0.8 * gap, "sampled {best} vs {gap}");
    }

    #[test]
    fn distance_matches_gradient_descent_projection() {
        // Gradient descent on 0.5||Ax' + b||^2 from x stays in x + range(Aᵀ)
        // and converges to the projection of x onto {Ax' = -b}.
        let inst = BilinearInstance::generate(6, 5, &[1.0, 0.8, 0.5], 3).unwrap();
        let a = inst.dense().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let w = random_point(&inst, &mut rng);
            let project = |start: &[f64], mat: &DMatrix<f64>, rhs: &[f64]| {
                let mut z = DVector::from_column_slice(start);
                let rv = DVector::from_column_slice(rhs);
                for _ in 0..2000 {
                    let g = mat.transpose() * (mat * &z + &rv);
                    z -= g;
                }
                (z - DVector::from_column_slice(start)).norm()
            };
            let dx = project(&w.x, &a, inst.b());
            let dy = project(&w.y, &a.transpose(), inst.c());
            let oracle = (dx * dx + dy * dy).sqrt();
            assert!((inst.distance_to_solution_set(&w) - oracle).abs() < 1e-8);
        }
    }

    #[test]
    fn spectrum_of_generated_instance() {
        let sigma = [2.0, 1.0, 0.25];
        let inst = BilinearInstance::generate(5, 4, &sigma, 2).unwrap();
        assert!((inst.op_norm() - 2.0).abs() < 1e-12);
        assert!((inst.sigma_min() - 0.25).abs() < 1e-12);
        assert!(BilinearInstance::generate(2, 2, &[1.0, 1.0, 1.0], 0).is_err());
    }
}
