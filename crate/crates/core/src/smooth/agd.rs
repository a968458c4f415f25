use serde::{Deserialize, Serialize};

use super::CompositeObjective;
use crate::error::{Error, Result};
use crate::numerics::{dist2, dot};
use crate::restart::{InnerAlgorithm, PhiFunction, PrimalDualPoint};

/// Upper limit on the number of `ell <- eta * ell` increases in one step.
pub const MAX_BACKTRACKS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgdConfig {
    /// Initial Lipschitz estimate.
    pub ell0: f64,
    /// Backtracking factor, `> 1`.
    pub eta: f64,
    /// Reset the Lipschitz estimate to `ell0` at every restart instead of
    /// carrying the last accepted value over.
    pub reset_ell: bool,
}

impl Default for AgdConfig {
    fn default() -> Self {
        Self {
            ell0: 1.0,
            eta: 1.25,
            reset_ell: false,
        }
    }
}

impl AgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ell0 > 0.0 && self.ell0.is_finite()) {
            return Err(Error::invalid(format!("ell0 must be positive, got {}", self.ell0)));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("eta must exceed 1, got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgdState {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: f64,
    pub ell: f64,
    pub eta: f64,
    pub t: usize,
    /// Backtracking increases taken by the most recent step.
    pub last_backtracks: usize,
}

/// Result of testing the sufficient-decrease condition at one `ell`.
struct Trial {
    point: Vec<f64>,
    accepted: bool,
}

impl AgdState {
    pub fn init(omega: &[f64], ell: f64, eta: f64) -> Self {
        Self {
            w: omega.to_vec(),
            v: omega.to_vec(),
            lambda: 1.0,
            ell,
            eta,
            t: 0,
            last_backtracks: 0,
        }
    }

    /// One step: backtrack on `ell` from its current value, take the prox
    /// gradient step from `v`, then update the momentum.
    pub fn step<F: CompositeObjective + ?Sized>(&mut self, obj: &F) -> Result<()> {
        let a_v = obj.smooth_value(&self.v);
        let mut grad = vec![0.0; self.v.len()];
        obj.smooth_gradient(&self.v, &mut grad);

        let mut ell = self.ell;
        let mut k = 0;
        let w_next = loop {
            let trial = majorization_trial(obj, &self.v, a_v, &grad, ell);
            if trial.accepted {
                break trial.point;
            }
            k += 1;
            if k > MAX_BACKTRACKS {
                return Err(Error::Backtracking { steps: k - 1, ell });
            }
            ell *= self.eta;
        };

        let lambda_next = 0.5 * (1.0 + (1.0 + 4.0 * self.lambda * self.lambda).sqrt());
        let momentum = (self.lambda - 1.0) / lambda_next;
        for ((v, wn), wo) in self.v.iter_mut().zip(&w_next).zip(&self.w) {
            *v = wn + momentum * (wn - wo);
        }
        self.w = w_next;
        self.lambda = lambda_next;
        self.ell = ell;
        self.t += 1;
        self.last_backtracks = k;
        Ok(())
    }

    /// Whether the sufficient-decrease condition holds at `ell` from the
    /// current momentum point. Exposed for checking minimality of the search.
    pub fn condition_holds<F: CompositeObjective + ?Sized>(&self, obj: &F, ell: f64) -> bool {
        let a_v = obj.smooth_value(&self.v);
        let grad = obj.gradient(&self.v);
        majorization_trial(obj, &self.v, a_v, &grad, ell).accepted
    }
}

/// `p = prox_{b/ell}(v - grad/ell)` and the test
/// `a(p) <= a(v) + gradᵀ(p - v) + ell/2 ||p - v||^2`; the `b(p)` terms on
/// both sides cancel. A few ulps of slack keep the test from failing on
/// rounding alone once `p` is essentially `v`.
fn majorization_trial<F: CompositeObjective + ?Sized>(
    obj: &F,
    v: &[f64],
    a_v: f64,
    grad: &[f64],
    ell: f64,
) -> Trial {
    let mut p: Vec<f64> = v.iter().zip(grad).map(|(vi, gi)| vi - gi / ell).collect();
    obj.prox(&mut p, 1.0 / ell);
    let d: Vec<f64> = p.iter().zip(v).map(|(pi, vi)| pi - vi).collect();
    let lin = dot(grad, &d);
    let quad = 0.5 * ell * dot(&d, &d);
    let a_p = obj.smooth_value(&p);
    let rhs = a_v + lin + quad;
    let slack = 10.0 * f64::EPSILON * (a_v.abs() + lin.abs() + quad);
    Trial {
        accepted: a_p <= rhs + slack,
        point: p,
    }
}

/// FISTA as a restartable inner algorithm. The restart candidate is the
/// prox-gradient iterate `w`.
pub struct Agd<'a, F: CompositeObjective + ?Sized> {
    obj: &'a F,
    config: AgdConfig,
    state: AgdState,
    point: PrimalDualPoint,
}

impl<'a, F: CompositeObjective + ?Sized> Agd<'a, F> {
    pub fn new(obj: &'a F, config: AgdConfig) -> Result<Self> {
        config.validate()?;
        let zero = vec![0.0; obj.dim()];
        Ok(Self {
            obj,
            config,
            state: AgdState::init(&zero, config.ell0, config.eta),
            point: PrimalDualPoint::primal(zero),
        })
    }

    pub fn state(&self) -> &AgdState {
        &self.state
    }
}

impl<F: CompositeObjective + ?Sized> InnerAlgorithm for Agd<'_, F> {
    fn initialize(&mut self, omega: &PrimalDualPoint) -> Result<()> {
        if omega.x.len() != self.obj.dim() || !omega.y.is_empty() {
            return Err(Error::invalid("starting point has the wrong dimensions"));
        }
        let ell = if self.config.reset_ell {
            self.config.ell0
        } else {
            self.state.ell
        };
        self.state = AgdState::init(&omega.x, ell, self.config.eta);
        self.point.x.clone_from(&omega.x);
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        self.state.step(self.obj)?;
        self.point.x.clone_from(&self.state.w);
        Ok(())
    }

    fn candidate(&self) -> &PrimalDualPoint {
        &self.point
    }

    fn current(&self) -> &PrimalDualPoint {
        &self.point
    }

    fn default_phi(&self) -> PhiFunction {
        PhiFunction::ShiftedSquare
    }

    fn objective(&self, w: &PrimalDualPoint) -> Option<f64> {
        Some(self.obj.value(&w.x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SublinearReport {
    pub passed: bool,
    /// Inner iterations `t` at which the bound failed.
    pub violations: Vec<usize>,
    /// Largest `gap - bound` over all checked iterations.
    pub worst_margin: f64,
    pub checked: usize,
}

/// Checks `f(w^t) - f(x) <= 2 eta L ||omega - x||^2 / (t + 1)^2` for the
/// epoch iterates `iterates[t - 1] = w^t`.
pub fn agd_sublinear_check<F: CompositeObjective + ?Sized>(
    obj: &F,
    omega: &[f64],
    iterates: &[Vec<f64>],
    x_ref: &[f64],
    eta: f64,
) -> Result<SublinearReport> {
    let l = obj
        .smoothness()
        .ok_or_else(|| Error::NotApplicable("objective does not advertise a smoothness constant".into()))?;
    let f_ref = obj.value(x_ref);
    let r2 = dist2(omega, x_ref).powi(2);
    let tol = 1e-12 * f_ref.abs().max(1.0);
    let mut violations = Vec::new();
    let mut worst_margin = f64::NEG_INFINITY;
    for (i, w) in iterates.iter().enumerate() {
        let t = (i + 1) as f64;
        let bound = 2.0 * eta * l * r2 / ((t + 1.0) * (t + 1.0));
        let margin = obj.value(w) - f_ref - bound;
        worst_margin = worst_margin.max(margin);
        if margin > tol {
            violations.push(i + 1);
        }
    }
    Ok(SublinearReport {
        passed: violations.is_empty(),
        violations,
        worst_margin,
        checked: iterates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::soft_threshold;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `a(x) = 0.5 xᵀHx - gᵀx`, `b = 0`.
    struct Quad {
        h: DMatrix<f64>,
        g: DVector<f64>,
        l: f64,
    }

    impl CompositeObjective for Quad {
        fn dim(&self) -> usize {
            self.g.len()
        }
        fn smooth_value(&self, x: &[f64]) -> f64 {
            let x = DVector::from_column_slice(x);
            0.5 * x.dot(&(&self.h * &x)) - self.g.dot(&x)
        }
        fn smooth_gradient(&self, x: &[f64], out: &mut [f64]) {
            let x = DVector::from_column_slice(x);
            out.copy_from_slice((&self.h * x - &self.g).as_slice());
        }
        fn smoothness(&self) -> Option<f64> {
            Some(self.l)
        }
    }

    fn random_quad(n: usize, seed: u64) -> Quad {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let h = m.transpose() * &m + DMatrix::identity(n, n) * 0.1;
        let g = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let l = h.symmetric_eigenvalues().max();
        Quad { h, g, l }
    }

    struct Lasso {
        a: DMatrix<f64>,
        b: DVector<f64>,
        lambda: f64,
    }

    impl CompositeObjective for Lasso {
        fn dim(&self) -> usize {
            self.a.ncols()
        }
        fn smooth_value(&self, x: &[f64]) -> f64 {
            let r = &self.a * DVector::from_column_slice(x) - &self.b;
            0.5 * r.norm_squared()
        }
        fn smooth_gradient(&self, x: &[f64], out: &mut [f64]) {
            let r = &self.a * DVector::from_column_slice(x) - &self.b;
            out.copy_from_slice((self.a.transpose() * r).as_slice());
        }
        fn nonsmooth_value(&self, x: &[f64]) -> f64 {
            self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
        }
        fn prox(&self, z: &mut [f64], step: f64) {
            let out = soft_threshold(z, self.lambda * step);
            z.copy_from_slice(&out);
        }
    }

    #[test]
    fn init_state() {
        let s = AgdState::init(&[0.0, 0.0], 1.0, 1.25);
        assert_eq!(s.w, vec![0.0, 0.0]);
        assert_eq!(s.v, s.w);
        assert_eq!(s.lambda, 1.0);
        assert_eq!(s.ell, 1.0);
        assert_eq!(s.t, 0);
    }

    #[test]
    fn lambda_recursion() {
        let q = random_quad(3, 1);
        let mut s = AgdState::init(&[1.0, 1.0, 1.0], 1.0, 1.25);
        s.step(&q).unwrap();
        assert!((s.lambda - 1.618_033_988_749_895).abs() < 1e-12);
        s.step(&q).unwrap();
        let expect = 0.5 * (1.0 + (1.0 + 4.0 * 1.618_033_988_749_895f64.powi(2)).sqrt());
        assert!((s.lambda - expect).abs() < 1e-12);
        assert!((s.lambda - 2.1935).abs() < 1e-4);
    }

    #[test]
    fn matching_curvature_needs_no_backtracking() {
        let l = 3.0;
        let q = Quad {
            h: DMatrix::identity(4, 4) * l,
            g: DVector::zeros(4),
            l,
        };
        let mut s = AgdState::init(&[1.0, -2.0, 0.5, 3.0], l, 1.25);
        for _ in 0..5 {
            s.step(&q).unwrap();
            assert_eq!(s.last_backtracks, 0);
            assert_eq!(s.ell, l);
        }
    }

    #[test]
    fn exact_gradient_step() {
        let q = Quad {
            h: DMatrix::identity(1, 1),
            g: DVector::zeros(1),
            l: 1.0,
        };
        let mut s = AgdState::init(&[1.0], 1.0, 2.0);
        s.step(&q).unwrap();
        assert_eq!(s.w, vec![0.0]);
    }

    #[test]
    fn lasso_step_matches_transcription() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
        let lasso = Lasso { a: a.clone(), b: b.clone(), lambda: 0.3 };
        let v0 = [0.4, -0.2, 0.9];
        let (ell0, eta) = (0.5, 1.5);

        // Straight-line transcription of one backtracking step.
        let av = |x: &DVector<f64>| 0.5 * (&a * x - &b).norm_squared();
        let v = DVector::from_column_slice(&v0);
        let g = a.transpose() * (&a * &v - &b);
        let mut ell = ell0;
        let p = loop {
            let z = &v - &g / ell;
            let p = z.map(|zi| zi.signum() * (zi.abs() - 0.3 / ell).max(0.0));
            let d = &p - &v;
            if av(&p) <= av(&v) + g.dot(&d) + 0.5 * ell * d.norm_squared() {
                break p;
            }
            ell *= eta;
        };

        let mut s = AgdState::init(&v0, ell0, eta);
        s.step(&lasso).unwrap();
        for i in 0..3 {
            assert!((s.w[i] - p[i]).abs() < 1e-12);
        }
        assert_eq!(s.ell, ell);
        // With lambda = 1 the momentum term vanishes on the first step.
        assert_eq!(s.v, s.w);
    }

    #[test]
    fn backtracking_is_minimal() {
        let q = random_quad(6, 2);
        let mut s = AgdState::init(&[1.0; 6], 1e-3, 1.25);
        for _ in 0..30 {
            let before = s.clone();
            s.step(&q).unwrap();
            assert!(before.condition_holds(&q, s.ell));
            if s.last_backtracks >= 1 {
                assert!(!before.condition_holds(&q, s.ell / s.eta));
            }
            assert!(s.ell >= before.ell);
        }
    }

    #[test]
    fn matches_closed_form_nesterov() {
        let q = random_quad(8, 3);
        let l = q.l;
        let x0 = DVector::from_element(8, 1.0);
        let mut s = AgdState::init(x0.as_slice(), l, 1.25);

        // Classic FISTA: x_k = y_k - grad(y_k)/L; t_{k+1}; y_{k+1} = x_k + (t_k - 1)/t_{k+1} (x_k - x_{k-1}).
        let (mut x_prev, mut y, mut tk) = (x0.clone(), x0, 1.0f64);
        for _ in 0..200 {
            let x = &y - (&q.h * &y - &q.g) / l;
            let tn = (1.0 + (1.0 + 4.0 * tk * tk).sqrt()) / 2.0;
            y = &x + (&x - &x_prev) * ((tk - 1.0) / tn);
            x_prev = x;
            tk = tn;

            s.step(&q).unwrap();
            assert_eq!(s.ell, l);
            for i in 0..8 {
                assert!((s.w[i] - x_prev[i]).abs() <= 1e-12 * (1.0 + x_prev[i].abs()));
            }
        }
    }

    #[test]
    fn runaway_backtracking_is_an_error() {
        struct Liar;
        impl CompositeObjective for Liar {
            fn dim(&self) -> usize {
                1
            }
            fn smooth_value(&self, x: &[f64]) -> f64 {
                if x[0] == 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
            fn smooth_gradient(&self, _x: &[f64], out: &mut [f64]) {
                out[0] = 1.0;
            }
        }
        // A slow eta keeps the trial point away from 1 for all 200 increases.
        let mut s = AgdState::init(&[1.0], 1.0, 1.01);
        assert!(matches!(s.step(&Liar), Err(Error::Backtracking { .. })));
    }

    #[test]
    fn distance_contracts_on_strongly_convex_quadratic() {
        let q = random_quad(10, 4);
        let alpha = q.h.symmetric_eigenvalues().min();
        let x_star = q.h.clone().lu().solve(&q.g).unwrap();
        let eta = 1.25;
        let x0 = vec![2.0; 10];
        let r0 = (DVector::from_column_slice(&x0) - &x_star).norm();
        let mut s = AgdState::init(&x0, 1.0, eta);
        for t in 1..=300 {
            s.step(&q).unwrap();
            let d = (DVector::from_column_slice(&s.w) - &x_star).norm();
            let bound = 2.0 / (t as f64 + 1.0) * (eta * q.l / alpha).sqrt() * r0;
            assert!(d <= bound * (1.0 + 1e-12), "t = {t}: {d} > {bound}");
        }
    }

    #[test]
    fn sublinear_bound_holds_and_is_monotone_in_l() {
        let q = random_quad(10, 5);
        let x_star = q.h.clone().lu().solve(&q.g).unwrap();
        let omega = vec![-1.0; 10];
        let mut s = AgdState::init(&omega, 1.0, 1.25);
        let mut iterates = Vec::new();
        for _ in 0..500 {
            s.step(&q).unwrap();
            iterates.push(s.w.clone());
        }
        let r = agd_sublinear_check(&q, &omega, &iterates, x_star.as_slice(), 1.25).unwrap();
        assert!(r.passed, "{r:?}");
        let loose = Quad { l: q.l * 10.0, ..q };
        let r10 = agd_sublinear_check(&loose, &omega, &iterates, x_star.as_slice(), 1.25).unwrap();
        assert!(r10.passed && r10.worst_margin <= r.worst_margin);
    }

    #[test]
    fn agd_inner_algorithm_warm_starts_ell() {
        let q = random_quad(4, 6);
        let mut agd = Agd::new(&q, AgdConfig { ell0: 1e-2, ..AgdConfig::default() }).unwrap();
        agd.initialize(&PrimalDualPoint::primal(vec![1.0; 4])).unwrap();
        for _ in 0..5 {
            agd.step().unwrap();
        }
        let ell = agd.state().ell;
        assert!(ell > 1e-2);
        agd.initialize(&PrimalDualPoint::primal(vec![0.0; 4])).unwrap();
        assert_eq!(agd.state().ell, ell);
        assert_eq!(agd.default_phi(), PhiFunction::ShiftedSquare);

        let mut reset = Agd::new(&q, AgdConfig { ell0: 1e-2, reset_ell: true, ..AgdConfig::default() }).unwrap();
        reset.initialize(&PrimalDualPoint::primal(vec![1.0; 4])).unwrap();
        reset.step().unwrap();
        reset.initialize(&PrimalDualPoint::primal(vec![1.0; 4])).unwrap();
        assert_eq!(reset.state().ell, 1e-2);
    }
}
