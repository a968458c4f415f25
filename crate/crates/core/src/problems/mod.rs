//! Instance generators and oracles: matrix games, box-constrained LPs,
//! unconstrained bilinear games, regression, the hard example for the
//! function scheme, quadratics and the lower-bound construction.

mod bilinear;
mod box_lp;
mod hard_example;
mod lower_bound;
mod matrix_game;
mod quadratic;
mod regression;

pub use bilinear::BilinearInstance;
pub use box_lp::{BoxLpInstance, LpResiduals};
pub use hard_example::HardExampleInstance;
pub use lower_bound::LowerBoundInstance;
pub use matrix_game::{GameFamily, MatrixGameInstance, FEASIBILITY_TOL};
pub use quadratic::QuadraticInstance;
pub use regression::{preprocess_columns, Loss, Preprocessed, RegressionInstance};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-ish random orthogonal matrix: Q factor of a Gaussian matrix with the
/// signs of R's diagonal folded in.
pub(crate) fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
