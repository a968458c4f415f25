use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::restart::{InnerAlgorithm, PhiFunction, PrimalDualPoint};

use super::SaddleOracle;

/// Which iterate sequence the running average tracks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageTarget {
    /// The `u` iterates.
    #[default]
    Current,
    /// The look-ahead points `v`, as in mirror prox.
    LookAhead,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtragradientState {
    average: PrimalDualPoint,
    pub current: PrimalDualPoint,
    pub t: usize,
    pub step: f64,
}

impl ExtragradientState {
    pub fn init(omega: &PrimalDualPoint, step: f64) -> Self {
        Self {
            average: omega.clone(),
            current: omega.clone(),
            t: 0,
            step,
        }
    }

    pub fn average(&self) -> Option<&PrimalDualPoint> {
        (self.t > 0).then_some(&self.average)
    }

    /// `v = argmin_W g(u)ᵀw + ||w - u||^2 / gamma` and
    /// `u+ = argmin_W g(v)ᵀw + ||w - u||^2 / gamma`. The penalty weight is
    /// `1/gamma`, so each move is a projected step of length `gamma / 2`.
    pub fn step<O: SaddleOracle + ?Sized>(&mut self, oracle: &O, target: AverageTarget) -> Result<()> {
        let half = 0.5 * self.step;
        let mut v = self.current.clone();
        shift(&mut v, &oracle.monotone_map(&self.current), half);
        oracle.project(&mut v)?;

        let mut next = self.current.clone();
        shift(&mut next, &oracle.monotone_map(&v), half);
        oracle.project(&mut next)?;
        self.current = next;

        self.t += 1;
        let t = self.t as f64;
        let keep = (t - 1.0) / t;
        let src = match target {
            AverageTarget::Current => &self.current,
            AverageTarget::LookAhead => &v,
        };
        for (a, n) in self.average.x.iter_mut().zip(&src.x) {
            *a = keep * *a + n / t;
        }
        for (a, n) in self.average.y.iter_mut().zip(&src.y) {
            *a = keep * *a + n / t;
        }
        Ok(())
    }
}

fn shift(w: &mut PrimalDualPoint, g: &PrimalDualPoint, scale: f64) {
    w.x.iter_mut().zip(&g.x).for_each(|(a, b)| *a -= scale * b);
    w.y.iter_mut().zip(&g.y).for_each(|(a, b)| *a -= scale * b);
}

pub struct Extragradient<'a, O: SaddleOracle + ?Sized> {
    oracle: &'a O,
    state: ExtragradientState,
    target: AverageTarget,
}

impl<'a, O: SaddleOracle + ?Sized> Extragradient<'a, O> {
    /// `step` must lie in `(0, 1/L]` for the `L`-smooth objective.
    pub fn new(oracle: &'a O, step: f64, smoothness: f64, target: AverageTarget) -> Result<Self> {
        if !(step > 0.0) || step * smoothness > 1.0 {
            return Err(Error::invalid(format!(
                "extragradient step {step} outside (0, 1/L] with L = {smoothness}"
            )));
        }
        let omega = PrimalDualPoint::zeros(oracle.primal_dim(), oracle.dual_dim());
        Ok(Self {
            oracle,
            state: ExtragradientState::init(&omega, step),
            target,
        })
    }

    pub fn state(&self) -> &ExtragradientState {
        &self.state
    }
}

impl<O: SaddleOracle + ?Sized> InnerAlgorithm for Extragradient<'_, O> {
    fn initialize(&mut self, omega: &PrimalDualPoint) -> Result<()> {
        if omega.dims() != (self.oracle.primal_dim(), self.oracle.dual_dim()) {
            return Err(Error::invalid("starting point has the wrong dimensions"));
        }
        self.state = ExtragradientState::init(omega, self.state.step);
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        self.state.step(self.oracle, self.target)
    }

    fn candidate(&self) -> &PrimalDualPoint {
        &self.state.average
    }

    fn current(&self) -> &PrimalDualPoint {
        &self.state.current
    }

    fn default_phi(&self) -> PhiFunction {
        PhiFunction::Linear
    }
}
