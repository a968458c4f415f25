use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, project_box_in_place, BoxBounds, SparseMatrix};
use crate::restart::PrimalDualPoint;
use crate::saddle::SaddleOracle;

/// `min cᵀx  s.t.  Ax = b, l <= x <= u`, solved through
/// `min_{l <= x <= u} max_y  cᵀx + yᵀAx - bᵀy`.
///
/// With this sign the optimal `y` is the negative of the usual equality
/// multiplier, so reduced costs are `c + Aᵀy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxLpInstance {
    pub c: Vec<f64>,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub bounds: BoxBounds,
    /// Known optimal primal-dual pair, for generated instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<PrimalDualPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub combined: f64,
}

impl BoxLpInstance {
    pub fn new(c: Vec<f64>, a: SparseMatrix, b: Vec<f64>, bounds: BoxBounds) -> Result<Self> {
        let inst = Self {
            c,
            a,
            b,
            bounds,
            planted: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.a.shape();
        if self.c.len() != n || self.bounds.len() != n || self.b.len() != m {
            return Err(Error::invalid(format!(
                "LP shapes disagree: A is {m}x{n}, c has {}, b has {}, bounds have {}",
                self.c.len(),
                self.b.len(),
                self.bounds.len()
            )));
        }
        if let Some(p) = &self.planted {
            if p.dims() != (n, m) {
                return Err(Error::invalid("planted solution has the wrong dimensions"));
            }
        }
        Ok(())
    }

    /// Transportation LP on a `sources x sinks` grid: variable `x_ij` ships
    /// from source `i` to sink `j`, row sums hit the supplies and column sums
    /// the demands. Roughly a third of the variables are planted at zero with
    /// positive reduced cost, a fifth at a finite upper bound with negative
    /// reduced cost, and the rest strictly inside their bounds; about half of
    /// the upper bounds are infinite. The planted pair is optimal by
    /// construction.
    pub fn generate_transportation(sources: usize, sinks: usize, seed: u64) -> Result<Self> {
        if sources == 0 || sinks == 0 {
            return Err(Error::invalid("transportation LP needs at least one source and one sink"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sources * sinks;
        let m = sources + sinks;
        let mut triplets = Vec::with_capacity(2 * n);
        for i in 0..sources {
            for j in 0..sinks {
                let k = i * sinks + j;
                triplets.push((i, k, 1.0));
                triplets.push((sources + j, k, 1.0));
            }
        }
        let a = SparseMatrix::from_triplets(m, n, &triplets)?;

        let mut x = vec![0.0; n];
        let mut r = vec![0.0; n];
        let lower = vec![0.0; n];
        let mut upper = vec![f64::INFINITY; n];
        for k in 0..n {
            let u: f64 = rng.random();
            if u < 0.35 {
                r[k] = rng.random_range(0.5..1.5);
                if rng.random_bool(0.5) {
                    upper[k] = rng.random_range(1.0..2.0);
                }
            } else if u < 0.55 {
                upper[k] = rng.random_range(1.0..2.0);
                x[k] = upper[k];
                r[k] = -rng.random_range(0.5..1.5);
            } else {
                x[k] = rng.random_range(0.2..0.8);
                if rng.random_bool(0.5) {
                    upper[k] = x[k] + rng.random_range(0.5..1.0);
                }
            }
        }
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x);
        let aty = a.mul_vec_transpose(&y);
        let c = r.iter().zip(&aty).map(|(ri, ai)| ri - ai).collect();
        let mut inst = Self::new(c, a, b, BoxBounds::new(lower, upper)?)?;
        inst.planted = Some(PrimalDualPoint::new(x, y));
        Ok(inst)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.ncols(), self.a.nrows())
    }

    /// Origin projected onto the box, with zero duals.
    pub fn default_start(&self) -> PrimalDualPoint {
        let (n, m) = self.dims();
        let mut x = vec![0.0; n];
        project_box_in_place(&mut x, &self.bounds);
        PrimalDualPoint::new(x, vec![0.0; m])
    }

    /// Primal infeasibility `||Ax - b||`, bound-aware dual infeasibility of
    /// the reduced costs, and the absolute primal-dual objective gap.
    pub fn residuals(&self, w: &PrimalDualPoint) -> LpResiduals {
        let mut ax = self.a.mul_vec(&w.x);
        ax.iter_mut().zip(&self.b).for_each(|(v, b)| *v -= b);
        let primal = norm2(&ax);

        let mut r = self.a.mul_vec_transpose(&w.y);
        r.iter_mut().zip(&self.c).for_each(|(v, c)| *v += c);

        let mut dual_sq = 0.0;
        let mut dual_obj = -dot(&self.b, &w.y);
        for ((&rj, &l), &u) in r.iter().zip(self.bounds.lower()).zip(self.bounds.upper()) {
            let viol = match (l.is_finite(), u.is_finite()) {
                (true, true) => 0.0,
                (true, false) => (-rj).max(0.0),
                (false, true) => rj.max(0.0),
                (false, false) => rj.abs(),
            };
            dual_sq += viol * viol;
            if l.is_finite() {
                dual_obj += l * rj.max(0.0);
            }
            if u.is_finite() {
                dual_obj += u * rj.min(0.0);
            }
        }
        let dual = dual_sq.sqrt();
        let gap = (dot(&self.c, &w.x) - dual_obj).abs();
        LpResiduals {
            primal,
            dual,
            gap,
            combined: (primal * primal + dual * dual + gap * gap).sqrt(),
        }
    }
}

impl SaddleOracle for BoxLpInstance {
    fn operator(&self) -> &SparseMatrix {
        &self.a
    }

    fn prox_primal(&self, z: &mut [f64], gamma: f64) -> Result<()> {
        z.iter_mut().zip(&self.c).for_each(|(v, c)| *v -= gamma * c);
        project_box_in_place(z, &self.bounds);
        Ok(())
    }

    fn prox_dual(&self, z: &mut [f64], gamma: f64) -> Result<()> {
        z.iter_mut().zip(&self.b).for_each(|(v, b)| *v -= gamma * b);
        Ok(())
    }

    fn monotone_map(&self, w: &PrimalDualPoint) -> PrimalDualPoint {
        let mut gx = self.a.mul_vec_transpose(&w.y);
        gx.iter_mut().zip(&self.c).for_each(|(g, c)| *g += c);
        let mut gy = self.a.mul_vec(&w.x);
        gy.iter_mut().zip(&self.b).for_each(|(g, b)| *g = b - *g);
        PrimalDualPoint::new(gx, gy)
    }

    fn project(&self, w: &mut PrimalDualPoint) -> Result<()> {
        project_box_in_place(&mut w.x, &self.bounds);
        Ok(())
    }

    fn is_feasible(&self, w: &PrimalDualPoint, tol: f64) -> bool {
        w.dims() == self.dims() && self.bounds.contains(&w.x, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min x1 s.t. x1 + x2 = 1, 0 <= x <= 1.
    fn tiny() -> BoxLpInstance {
        BoxLpInstance::new(
            vec![1.0, 0.0],
            SparseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            vec![1.0],
            BoxBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn tiny_lp_optimum_by_basic_solutions() {
        let lp = tiny();
        // One equality: a basic solution has one basic variable, the other at a bound.
        let mut best: Option<(f64, Vec<f64>)> = None;
        for basic in 0..2 {
            let other = 1 - basic;
            for bound in [0.0, 1.0] {
                let mut x = vec![0.0; 2];
                x[other] = bound;
                x[basic] = 1.0 - bound;
                if (0.0..=1.0).contains(&x[basic]) {
                    let obj = x[0];
                    if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                        best = Some((obj, x));
                    }
                }
            }
        }
        let (_, x) = best.unwrap();
        assert_eq!(x, vec![0.0, 1.0]);
        // y = 0 gives reduced costs r = c = (1, 0), dual feasible for the box.
        let res = lp.residuals(&PrimalDualPoint::new(x, vec![0.0]));
        assert_eq!(res.primal, 0.0);
        assert_eq!(res.dual, 0.0);
        assert!(res.gap < 1e-15);
        assert!(res.combined < 1e-15);
    }

    #[test]
    fn primal_infeasibility_is_euclidean() {
        let lp = BoxLpInstance::new(
            vec![0.0, 0.0],
            SparseMatrix::identity(2),
            vec![0.0, 0.0],
            BoxBounds::nonnegative(2),
        )
        .unwrap();
        let r = lp.residuals(&PrimalDualPoint::new(vec![0.3, 0.4], vec![0.0, 0.0]));
        assert!((r.primal - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_dual_gap_is_bound_terms_of_c() {
        let lp = BoxLpInstance::new(
            vec![2.0, -1.0, 3.0],
            SparseMatrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap(),
            vec![1.0],
            BoxBounds::new(vec![0.5, 0.0, f64::NEG_INFINITY], vec![f64::INFINITY, 2.0, 4.0]).unwrap(),
        )
        .unwrap();
        let x = vec![1.0, 0.5, -0.5];
        let r = lp.residuals(&PrimalDualPoint::new(x.clone(), vec![0.0]));
        let cx: f64 = 2.0 * 1.0 - 0.5 - 1.5;
        let bound_terms = 0.5 * 2.0 + -2.0 + 4.0 * 0.0;
        assert!((r.gap - (cx - bound_terms).abs()).abs() < 1e-15);
        // r = c: x3 has only an upper bound and r3 = 3 > 0 is a violation.
        assert!((r.dual - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dual_violation_conventions() {
        let inf = f64::INFINITY;
        let lp = BoxLpInstance::new(
            vec![-1.0, 1.0, -2.0, 5.0],
            SparseMatrix::zeros(1, 4),
            vec![0.0],
            BoxBounds::new(vec![0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0], vec![inf, 1.0, inf, 1.0]).unwrap(),
        )
        .unwrap();
        let r = lp.residuals(&PrimalDualPoint::new(vec![0.0, 0.0, 0.0, 0.0], vec![0.0]));
        // violations: 1 (lower only, r<0), 1 (upper only, r>0), 2 (free), 0 (boxed)
        assert!((r.dual - (1.0f64 + 1.0 + 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn planted_transportation_is_optimal() {
        for seed in 0..5 {
            let lp = BoxLpInstance::generate_transportation(10, 20, seed).unwrap();
            assert_eq!(lp.dims(), (200, 30));
            let p = lp.planted.clone().unwrap();
            assert!(lp.is_feasible(&p, 0.0));
            let r = lp.residuals(&p);
            assert!(r.combined < 1e-8, "{r:?}");
            assert!(lp.bounds.upper().iter().any(|u| u.is_infinite()));
            assert!(lp.bounds.upper().iter().any(|u| u.is_finite()));
        }
    }

    #[test]
    fn prox_and_map_consistency() {
        let lp = BoxLpInstance::generate_transportation(2, 3, 1).unwrap();
        let p = lp.planted.clone().unwrap();
        // At the saddle point the primal prox-gradient step is a fixed point.
        let gamma = 0.1;
        let mut z: Vec<f64> = p.x.iter().zip(lp.a.mul_vec_transpose(&p.y)).map(|(x, k)| x - gamma * k).collect();
        lp.prox_primal(&mut z, gamma).unwrap();
        for (a, b) in z.iter().zip(&p.x) {
            assert!((a - b).abs() < 1e-12);
        }
        let g = lp.monotone_map(&p);
        assert!(norm2(&g.y) < 1e-12);
    }
}
