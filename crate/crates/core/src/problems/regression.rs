use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{op_norm, soft_threshold, SparseMatrix};
use crate::smooth::CompositeObjective;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `l_i(s) = (s - b_i)^2 / 2`
    Lasso,
    /// `l_i(s) = log(1 + exp(s sign(b_i)))`
    Logistic,
}

/// `f(x) = sum_i l_i(a_iᵀx) + lambda ||x||_1`.
#[derive(Clone, Debug)]
pub struct RegressionInstance {
    data: SparseMatrix,
    labels: Vec<f64>,
    lambda: f64,
    loss: Loss,
    smoothness: f64,
}

/// Output of column preprocessing.
#[derive(Clone, Debug, PartialEq)]
pub struct Preprocessed {
    pub matrix: SparseMatrix,
    /// Original index of every retained feature column, in order. The
    /// intercept is the last column and has no entry here.
    pub kept_columns: Vec<usize>,
}

/// Drops all-zero columns, appends an intercept column of ones, then scales
/// every column to unit Euclidean norm.
pub fn preprocess_columns(data: &SparseMatrix) -> Result<Preprocessed> {
    let (m, n) = data.shape();
    if m == 0 {
        return Err(Error::invalid("data matrix has no rows"));
    }
    let norms = data.column_norms();
    let kept_columns: Vec<usize> = (0..n).filter(|&j| norms[j] > 0.0).collect();
    let mut new_index = vec![usize::MAX; n];
    for (k, &j) in kept_columns.iter().enumerate() {
        new_index[j] = k;
    }
    let ncols = kept_columns.len() + 1;
    let mut triplets = Vec::with_capacity(data.nnz() + m);
    for i in 0..m {
        let (cols, vals) = data.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if new_index[j] != usize::MAX {
                triplets.push((i, new_index[j], v));
            }
        }
        triplets.push((i, ncols - 1, 1.0));
    }
    let mut matrix = SparseMatrix::from_triplets(m, ncols, &triplets)?;
    let scale: Vec<f64> = matrix.column_norms().iter().map(|s| 1.0 / s).collect();
    matrix.scale_columns(&scale);
    Ok(Preprocessed { matrix, kept_columns })
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `log(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

impl RegressionInstance {
    /// Takes already-preprocessed data; the smoothness constant is
    /// `||A||^2` (lasso) or `||A||^2 / 4` (logistic) with `||A||` from power
    /// iteration.
    pub fn new(data: SparseMatrix, labels: Vec<f64>, lambda: f64, loss: Loss) -> Result<Self> {
        if labels.len() != data.nrows() {
            return Err(Error::invalid(format!(
                "{} labels for {} data rows",
                labels.len(),
                data.nrows()
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        let norm = op_norm(&data, 1e-10, 10_000)?.value;
        let smoothness = match loss {
            Loss::Lasso => norm * norm,
            Loss::Logistic => norm * norm / 4.0,
        };
        Ok(Self {
            data,
            labels,
            lambda,
            loss,
            smoothness,
        })
    }

    /// Sparse Gaussian features with the given density, labels from a
    /// sparse planted model (plus noise for lasso, signs for logistic),
    /// preprocessed.
    pub fn generate(rows: usize, cols: usize, density: f64, loss: Loss, lambda: f64, seed: u64) -> Result<Self> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::invalid("density must lie in (0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triplets = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if rng.random_bool(density) {
                    triplets.push((i, j, rng.sample::<f64, _>(StandardNormal)));
                }
            }
        }
        let raw = SparseMatrix::from_triplets(rows, cols, &triplets)?;
        let truth: Vec<f64> = (0..cols)
            .map(|_| if rng.random_bool(0.2) { rng.sample(StandardNormal) } else { 0.0 })
            .collect();
        let scores = raw.mul_vec(&truth);
        let labels = scores
            .iter()
            .map(|s| match loss {
                Loss::Lasso => s + 0.1 * rng.sample::<f64, _>(StandardNormal),
                Loss::Logistic => {
                    if *s + 0.1 * rng.sample::<f64, _>(StandardNormal) >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect();
        let pre = preprocess_columns(&raw)?;
        Self::new(pre.matrix, labels, lambda, loss)
    }

    pub fn data(&self) -> &SparseMatrix {
        &self.data
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }
}

impl CompositeObjective for RegressionInstance {
    fn dim(&self) -> usize {
        self.data.ncols()
    }

    fn smooth_value(&self, x: &[f64]) -> f64 {
        let s = self.data.mul_vec(x);
        match self.loss {
            Loss::Lasso => 0.5 * s.iter().zip(&self.labels).map(|(si, bi)| (si - bi) * (si - bi)).sum::<f64>(),
            Loss::Logistic => s.iter().zip(&self.labels).map(|(si, bi)| softplus(si * sign(*bi))).sum(),
        }
    }

    fn smooth_gradient(&self, x: &[f64], out: &mut [f64]) {
        let s = self.data.mul_vec(x);
        let d: Vec<f64> = match self.loss {
            Loss::Lasso => s.iter().zip(&self.labels).map(|(si, bi)| si - bi).collect(),
            Loss::Logistic => s
                .iter()
                .zip(&self.labels)
                .map(|(si, bi)| {
                    let sg = sign(*bi);
                    sg * sigmoid(si * sg)
                })
                .collect(),
        };
        self.data.mul_vec_transpose_into(&d, out);
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, z: &mut [f64], step: f64) {
        let out = soft_threshold(z, self.lambda * step);
        z.copy_from_slice(&out);
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.smoothness)
    }
}
