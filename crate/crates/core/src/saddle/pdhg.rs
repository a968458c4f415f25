use crate::error::{Error, Result};
use crate::restart::{InnerAlgorithm, NormSpec, PhiFunction, PrimalDualPoint};

use super::SaddleOracle;

/// Internal state of PDHG within one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct PdhgState {
    /// Running mean of `u^1..u^t`; meaningless while `t == 0`.
    average: PrimalDualPoint,
    pub current: PrimalDualPoint,
    pub extrapolated_primal: Vec<f64>,
    pub t: usize,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl PdhgState {
    /// Starts an epoch at `omega`: `u = omega`, `x_hat = omega.x`, no average yet.
    pub fn init(omega: &PrimalDualPoint, step_primal: f64, step_dual: f64) -> Self {
        Self {
            average: omega.clone(),
            current: omega.clone(),
            extrapolated_primal: omega.x.clone(),
            t: 0,
            step_primal,
            step_dual,
        }
    }

    pub fn average(&self) -> Option<&PrimalDualPoint> {
        (self.t > 0).then_some(&self.average)
    }

    /// One PDHG iteration: dual prox step at `x_hat`, primal prox step at the
    /// new dual point, primal extrapolation, then the running mean update
    /// `avg <- ((t-1)/t) avg + u/t`.
    pub fn step<O: SaddleOracle + ?Sized>(&mut self, oracle: &O) -> Result<()> {
        let k = oracle.operator();
        let (gx, gy) = (self.step_primal, self.step_dual);

        let mut y_next = k.mul_vec(&self.extrapolated_primal);
        y_next
            .iter_mut()
            .zip(&self.current.y)
            .for_each(|(v, u)| *v = u + gy * *v);
        oracle.prox_dual(&mut y_next, gy)?;

        let mut x_next = k.mul_vec_transpose(&y_next);
        x_next
            .iter_mut()
            .zip(&self.current.x)
            .for_each(|(v, u)| *v = u - gx * *v);
        oracle.prox_primal(&mut x_next, gx)?;

        for ((xh, xn), xo) in self.extrapolated_primal.iter_mut().zip(&x_next).zip(&self.current.x) {
            *xh = 2.0 * xn - xo;
        }
        self.current.x = x_next;
        self.current.y = y_next;

        self.t += 1;
        let t = self.t as f64;
        let keep = (t - 1.0) / t;
        running_mean(&mut self.average.x, &self.current.x, keep, t);
        running_mean(&mut self.average.y, &self.current.y, keep, t);
        Ok(())
    }
}

fn running_mean(avg: &mut [f64], new: &[f64], keep: f64, t: f64) {
    for (a, n) in avg.iter_mut().zip(new) {
        *a = keep * *a + n / t;
    }
}

/// PDHG as a restartable inner algorithm.
pub struct Pdhg<'a, O: SaddleOracle + ?Sized> {
    oracle: &'a O,
    state: PdhgState,
}

impl<'a, O: SaddleOracle + ?Sized> Pdhg<'a, O> {
    /// Rejects step sizes with `gamma_x * gamma_y * op_norm^2 >= 1`.
    pub fn new(oracle: &'a O, step_primal: f64, step_dual: f64, op_norm: f64) -> Result<Self> {
        if !(step_primal > 0.0 && step_dual > 0.0) {
            return Err(Error::invalid("PDHG step sizes must be positive"));
        }
        if step_primal * step_dual * op_norm * op_norm >= 1.0 {
            return Err(Error::invalid(format!(
                "PDHG step sizes violate gamma_x gamma_y L^2 < 1 (gamma_x = {step_primal}, gamma_y = {step_dual}, L = {op_norm})"
            )));
        }
        let omega = PrimalDualPoint::zeros(oracle.primal_dim(), oracle.dual_dim());
        Ok(Self {
            oracle,
            state: PdhgState::init(&omega, step_primal, step_dual),
        })
    }

    pub fn state(&self) -> &PdhgState {
        &self.state
    }
}

impl<O: SaddleOracle + ?Sized> InnerAlgorithm for Pdhg<'_, O> {
    fn initialize(&mut self, omega: &PrimalDualPoint) -> Result<()> {
        if omega.dims() != (self.oracle.primal_dim(), self.oracle.dual_dim()) {
            return Err(Error::invalid("starting point has the wrong dimensions"));
        }
        self.state = PdhgState::init(omega, self.state.step_primal, self.state.step_dual);
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        self.state.step(self.oracle)
    }

    fn candidate(&self) -> &PrimalDualPoint {
        &self.state.average
    }

    fn current(&self) -> &PrimalDualPoint {
        &self.state.current
    }

    fn norm(&self) -> NormSpec {
        NormSpec::from_step_sizes(self.state.step_primal, self.state.step_dual)
            .expect("step sizes validated at construction")
    }

    fn default_phi(&self) -> PhiFunction {
        PhiFunction::Linear
    }
}
