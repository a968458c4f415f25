//! Saddle-point methods for `min_x max_y f(x, y)` with
//! `f(x, y) = yᵀKx + G(x) - F*(y)`: PDHG and extragradient, both wrapped as
//! [`InnerAlgorithm`](crate::restart::InnerAlgorithm)s whose restart candidate
//! is the running average of their iterates.

mod extragradient;
mod pdhg;

pub use extragradient::{AverageTarget, Extragradient, ExtragradientState};
pub use pdhg::{Pdhg, PdhgState};

use crate::error::{Error, Result};
use crate::numerics::SparseMatrix;
use crate::restart::{NormSpec, PrimalDualPoint};

/// Problem access needed by the saddle-point solvers.
///
/// `prox_primal` and `prox_dual` overwrite `z` with
/// `argmin G(x) + ||x - z||^2 / (2 gamma)` and
/// `argmin F*(y) + ||y - z||^2 / (2 gamma)` respectively; the coupling term
/// through `K` is handled by the solver.
pub trait SaddleOracle: Sync {
    /// The coupling operator `K` in `yᵀKx`.
    fn operator(&self) -> &SparseMatrix;

    fn primal_dim(&self) -> usize {
        self.operator().ncols()
    }

    fn dual_dim(&self) -> usize {
        self.operator().nrows()
    }

    fn prox_primal(&self, z: &mut [f64], gamma: f64) -> Result<()>;

    fn prox_dual(&self, z: &mut [f64], gamma: f64) -> Result<()>;

    /// `g(w) = (grad_x f(w), -grad_y f(w))`.
    fn monotone_map(&self, w: &PrimalDualPoint) -> PrimalDualPoint;

    /// Euclidean projection onto `W = X x Y`.
    fn project(&self, w: &mut PrimalDualPoint) -> Result<()>;

    /// Membership in `W` up to `tol`.
    fn is_feasible(&self, w: &PrimalDualPoint, tol: f64) -> bool;
}

/// Result of checking `||w - w*|| <= bound * ||omega - w*||` along one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractReport {
    pub passed: bool,
    pub bound: f64,
    pub worst_ratio: f64,
    /// Largest `ratio - bound` seen; negative when every point passes.
    pub worst_margin: f64,
    pub checked: usize,
}

/// Relative slack absorbing rounding in the distance computations.
const CONTRACT_SLACK: f64 = 1e-12;

pub fn check_distance_contraction(
    points: &[PrimalDualPoint],
    epoch_start: &PrimalDualPoint,
    w_star: &PrimalDualPoint,
    bound: f64,
    norm: NormSpec,
) -> ContractReport {
    let start = norm.distance(epoch_start, w_star);
    let mut worst_ratio = 0.0f64;
    let mut passed = true;
    for p in points {
        let d = norm.distance(p, w_star);
        if d > bound * start + CONTRACT_SLACK * start.max(1.0) {
            passed = false;
        }
        let ratio = if start > 0.0 {
            d / start
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst_ratio = worst_ratio.max(ratio);
    }
    ContractReport {
        passed,
        bound,
        worst_ratio,
        worst_margin: worst_ratio - bound,
        checked: points.len(),
    }
}

/// Checks the PDHG distance bound `||w_i^t - w*|| <= (1 - gx gy L^2)^{-1/2} ||omega - w*||`
/// in the norm weighted by the inverse step sizes.
pub fn pdhg_residual_contract(
    points: &[PrimalDualPoint],
    epoch_start: &PrimalDualPoint,
    w_star: Option<&PrimalDualPoint>,
    step_primal: f64,
    step_dual: f64,
    op_norm: f64,
) -> Result<ContractReport> {
    let w_star = w_star.ok_or_else(|| Error::NotApplicable("instance has no known saddle point".into()))?;
    let product = step_primal * step_dual * op_norm * op_norm;
    if product >= 1.0 {
        return Err(Error::invalid("step sizes violate gamma_x gamma_y L^2 < 1"));
    }
    let bound = (1.0 - product).powf(-0.5);
    let norm = NormSpec::from_step_sizes(step_primal, step_dual)?;
    Ok(check_distance_contraction(points, epoch_start, w_star, bound, norm))
}

/// Extragradient analogue: averaged iterates never leave the ball of radius
/// `||omega - w*||` around `w*`.
pub fn extragradient_contract(
    points: &[PrimalDualPoint],
    epoch_start: &PrimalDualPoint,
    w_star: Option<&PrimalDualPoint>,
) -> Result<ContractReport> {
    let w_star = w_star.ok_or_else(|| Error::NotApplicable("instance has no known saddle point".into()))?;
    Ok(check_distance_contraction(points, epoch_start, w_star, 1.0, NormSpec::euclidean()))
}

#[cfg(test)]
pub(crate) mod test_oracles {
    use super::*;

    /// `f(x, y) = cᵀx + yᵀAx + bᵀy` over the whole space.
    pub struct FreeBilinear {
        pub a: SparseMatrix,
        pub b: Vec<f64>,
        pub c: Vec<f64>,
    }

    impl SaddleOracle for FreeBilinear {
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
            let mut gx = self.a.mul_vec_transpose(&w.y);
            gx.iter_mut().zip(&self.c).for_each(|(g, c)| *g += c);
            let mut gy = self.a.mul_vec(&w.x);
            gy.iter_mut().zip(&self.b).for_each(|(g, b)| *g = -(*g + b));
            PrimalDualPoint::new(gx, gy)
        }
        fn project(&self, _w: &mut PrimalDualPoint) -> Result<()> {
            Ok(())
        }
        fn is_feasible(&self, _w: &PrimalDualPoint, _tol: f64) -> bool {
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contract_zero_operator_is_trivial() {
        let start = PrimalDualPoint::new(vec![1.0], vec![2.0]);
        let pts = vec![start.clone(); 3];
        let w_star = PrimalDualPoint::new(vec![0.0], vec![0.0]);
        let r = pdhg_residual_contract(&pts, &start, Some(&w_star), 0.5, 0.5, 0.0).unwrap();
        assert!(r.passed);
        assert!(r.worst_ratio <= 1.0);
    }

    #[test]
    fn contract_needs_saddle_point() {
        let p = PrimalDualPoint::zeros(1, 1);
        assert!(matches!(
            pdhg_residual_contract(&[], &p, None, 0.1, 0.1, 1.0),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(extragradient_contract(&[], &p, None), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn contract_reports_violation() {
        let start = PrimalDualPoint::new(vec![1.0], vec![0.0]);
        let far = PrimalDualPoint::new(vec![3.0], vec![0.0]);
        let w_star = PrimalDualPoint::zeros(1, 1);
        let r = extragradient_contract(&[far], &start, Some(&w_star)).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_ratio, 3.0);
    }
}
