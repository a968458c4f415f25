use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{project_simplex_in_place, SparseMatrix};
use crate::restart::PrimalDualPoint;
use crate::saddle::SaddleOracle;

/// Tolerance for simplex membership.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameFamily {
    /// Entries uniform on `[-1, -0.5]`.
    UniformNegative,
    /// Standard normal entries.
    Normal,
}

/// `min_{x in simplex_n} max_{y in simplex_m} yᵀAx` with `A` of size `m x n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGameInstance {
    a: SparseMatrix,
    family: GameFamily,
    seed: u64,
}

impl MatrixGameInstance {
    pub fn generate(m: usize, n: usize, family: GameFamily, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| match family {
                        GameFamily::UniformNegative => rng.random_range(-1.0..=-0.5),
                        GameFamily::Normal => rng.sample(StandardNormal),
                    })
                    .collect()
            })
            .collect();
        let a = SparseMatrix::from_rows(&rows).expect("rows have equal length");
        Self { a, family, seed }
    }

    pub fn from_matrix(a: SparseMatrix, family: GameFamily, seed: u64) -> Self {
        Self { a, family, seed }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn family(&self) -> GameFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform mixed strategies for both players.
    pub fn uniform_start(&self) -> PrimalDualPoint {
        let (m, n) = self.a.shape();
        PrimalDualPoint::new(vec![1.0 / n as f64; n], vec![1.0 / m as f64; m])
    }

    /// Duality gap over the whole feasible set:
    /// `max_i (A x)_i - min_j (Aᵀ y)_j`.
    pub fn residual(&self, w: &PrimalDualPoint) -> Result<f64> {
        if !self.is_feasible(w, FEASIBILITY_TOL) {
            return Err(Error::invalid("strategy pair is not on the simplices"));
        }
        Ok(self.gap_unchecked(w))
    }

    pub(crate) fn gap_unchecked(&self, w: &PrimalDualPoint) -> f64 {
        let ax = self.a.mul_vec(&w.x);
        let aty = self.a.mul_vec_transpose(&w.y);
        let best_y = ax.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let best_x = aty.iter().cloned().fold(f64::INFINITY, f64::min);
        best_y - best_x
    }
}

fn on_simplex(v: &[f64], tol: f64) -> bool {
    v.iter().all(|&p| p >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol
}

impl SaddleOracle for MatrixGameInstance {
    fn operator(&self) -> &SparseMatrix {
        &self.a
    }

    fn prox_primal(&self, z: &mut [f64], _gamma: f64) -> Result<()> {
        project_simplex_in_place(z)
    }

    fn prox_dual(&self, z: &mut [f64], _gamma: f64) -> Result<()> {
        project_simplex_in_place(z)
    }

    fn monotone_map(&self, w: &PrimalDualPoint) -> PrimalDualPoint {
        let gx = self.a.mul_vec_transpose(&w.y);
        let gy = self.a.mul_vec(&w.x).into_iter().map(|v| -v).collect();
        PrimalDualPoint::new(gx, gy)
    }

    fn project(&self, w: &mut PrimalDualPoint) -> Result<()> {
        project_simplex_in_place(&mut w.x)?;
        project_simplex_in_place(&mut w.y)
    }

    fn is_feasible(&self, w: &PrimalDualPoint, tol: f64) -> bool {
        w.dims() == (self.a.ncols(), self.a.nrows()) && on_simplex(&w.x, tol) && on_simplex(&w.y, tol)
    }
}
