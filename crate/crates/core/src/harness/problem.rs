use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::{load_libsvm, InstanceFile};
use crate::numerics::{op_norm, SparseMatrix};
use crate::problems::{
    BilinearInstance, BoxLpInstance, HardExampleInstance, MatrixGameInstance, QuadraticInstance, RegressionInstance,
};
use crate::restart::{PhiFunction, PrimalDualPoint, RestartPolicy, StoppingRule};
use crate::saddle::SaddleOracle;
use crate::smooth::{Agd, AgdConfig, CompositeObjective};

/// A materialized problem with its residual.
#[derive(Clone, Debug)]
pub enum Problem {
    MatrixGame(MatrixGameInstance),
    BoxLp(BoxLpInstance),
    Bilinear(BilinearInstance),
    Regression {
        instance: RegressionInstance,
        /// Reference optimal value; the residual is `f(x) - reference`.
        reference: f64,
    },
    HardExample(HardExampleInstance),
    Quadratic(QuadraticInstance),
}

fn need<T>(v: Option<T>, what: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("{kind} instance needs `{what}`")))
}

impl Problem {
    /// Builds the problem described by `file`; relative LIBSVM paths resolve
    /// against `base_dir`.
    pub fn from_file(file: &InstanceFile, base_dir: Option<&Path>) -> Result<Self> {
        Ok(match file {
            InstanceFile::MatrixGame {
                seed,
                rows,
                cols,
                family,
                matrix,
            } => match matrix {
                Some(a) => {
                    if a.shape() != (*rows, *cols) {
                        return Err(Error::invalid("matrix payload disagrees with rows/cols"));
                    }
                    Problem::MatrixGame(MatrixGameInstance::from_matrix(a.clone(), *family, *seed))
                }
                None => Problem::MatrixGame(MatrixGameInstance::generate(*rows, *cols, *family, *seed)),
            },
            InstanceFile::BoxLp {
                seed,
                sources,
                sinks,
                lp,
            } => match lp {
                Some(lp) => {
                    lp.validate()?;
                    Problem::BoxLp(lp.clone())
                }
                None => Problem::BoxLp(BoxLpInstance::generate_transportation(
                    need(*sources, "sources", "box_lp")?,
                    need(*sinks, "sinks", "box_lp")?,
                    need(*seed, "seed", "box_lp")?,
                )?),
            },
            InstanceFile::Bilinear {
                seed,
                rows,
                cols,
                singular_values,
                a,
                b,
                c,
            } => match a {
                Some(a) => {
                    if a.len() != rows * cols {
                        return Err(Error::invalid("dense payload length is not rows * cols"));
                    }
                    Problem::Bilinear(BilinearInstance::from_parts(
                        DMatrix::from_row_slice(*rows, *cols, a),
                        need(b.clone(), "b", "bilinear")?,
                        need(c.clone(), "c", "bilinear")?,
                    )?)
                }
                None => {
                    let seed = need(*seed, "seed", "bilinear")?;
                    Problem::Bilinear(match singular_values {
                        Some(s) => BilinearInstance::generate(*rows, *cols, s, seed)?,
                        None => BilinearInstance::generate_random(*rows, *cols, (*rows).min(*cols), seed)?,
                    })
                }
            },
            InstanceFile::Regression {
                seed,
                loss,
                lambda,
                rows,
                cols,
                density,
                libsvm,
                best_known,
            } => {
                let instance = match libsvm {
                    Some(path) => {
                        let path = match base_dir {
                            Some(dir) if Path::new(path).is_relative() => dir.join(path),
                            _ => Path::new(path).to_path_buf(),
                        };
                        let ds = load_libsvm(BufReader::new(File::open(&path)?))?;
                        RegressionInstance::new(ds.matrix, ds.labels, *lambda, *loss)?
                    }
                    None => RegressionInstance::generate(
                        need(*rows, "rows", "regression")?,
                        need(*cols, "cols", "regression")?,
                        density.unwrap_or(0.1),
                        *loss,
                        *lambda,
                        need(*seed, "seed", "regression")?,
                    )?,
                };
                let reference = match best_known {
                    Some(v) => *v,
                    None => reference_value(&instance)?,
                };
                Problem::Regression { instance, reference }
            }
            InstanceFile::HardExample { n, delta, alpha } => {
                Problem::HardExample(HardExampleInstance::new(*n, *delta, *alpha)?)
            }
            InstanceFile::Quadratic {
                seed,
                n,
                alpha,
                smoothness,
            } => Problem::Quadratic(QuadraticInstance::generate(*n, *alpha, *smoothness, *seed)?),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::MatrixGame(_) => "matrix_game",
            Problem::BoxLp(_) => "box_lp",
            Problem::Bilinear(_) => "bilinear",
            Problem::Regression { .. } => "regression",
            Problem::HardExample(_) => "hard_example",
            Problem::Quadratic(_) => "quadratic",
        }
    }

    pub fn saddle(&self) -> Option<&dyn SaddleOracle> {
        match self {
            Problem::MatrixGame(g) => Some(g),
            Problem::BoxLp(lp) => Some(lp),
            Problem::Bilinear(b) => Some(b),
            _ => None,
        }
    }

    pub fn objective(&self) -> Option<&dyn CompositeObjective> {
        match self {
            Problem::Regression { instance, .. } => Some(instance),
            Problem::HardExample(h) => Some(h),
            Problem::Quadratic(q) => Some(q),
            _ => None,
        }
    }

    pub fn operator(&self) -> Option<&SparseMatrix> {
        self.saddle().map(|s| s.operator())
    }

    /// Operator norm of the coupling matrix, by power iteration.
    pub fn operator_norm(&self) -> Result<f64> {
        let a = self
            .operator()
            .ok_or_else(|| Error::NotApplicable(format!("{} has no coupling operator", self.kind())))?;
        Ok(op_norm(a, 1e-12, 100_000)?.value)
    }

    /// Default starting point: uniform strategies for games, the projected
    /// origin for LPs, the origin for bilinear and regression problems, and
    /// all coordinates at -1 for the hard example.
    pub fn start(&self) -> PrimalDualPoint {
        match self {
            Problem::MatrixGame(g) => g.uniform_start(),
            Problem::BoxLp(lp) => lp.default_start(),
            Problem::Bilinear(b) => {
                let (m, n) = b.dense().shape();
                PrimalDualPoint::zeros(n, m)
            }
            Problem::Regression { instance, .. } => PrimalDualPoint::primal(vec![0.0; instance.dim()]),
            Problem::HardExample(h) => PrimalDualPoint::primal(h.start()),
            Problem::Quadratic(q) => PrimalDualPoint::primal(vec![0.0; q.dim()]),
        }
    }

    /// Duality gap for games, combined residual for LPs, the KKT norm
    /// `||(Aᵀy + c, Ax + b)||` for bilinear games, and `f(x) - f*` (or the
    /// reference value) for minimization problems.
    pub fn residual(&self, w: &PrimalDualPoint) -> f64 {
        match self {
            Problem::MatrixGame(g) => g.gap_unchecked(w),
            Problem::BoxLp(lp) => lp.residuals(w).combined,
            Problem::Bilinear(b) => b.localized_gap(w, 1.0).unwrap_or(f64::NAN),
            Problem::Regression { instance, reference } => instance.value(&w.x) - reference,
            Problem::HardExample(h) => h.value(&w.x) - h.optimal_value(),
            Problem::Quadratic(q) => q.value(&w.x),
        }
    }
}

/// Long restarted-FISTA run whose smallest objective value serves as the
/// reference optimum for regression residuals.
pub fn reference_value(instance: &RegressionInstance) -> Result<f64> {
    let mut agd = Agd::new(instance, AgdConfig::default())?;
    let start = PrimalDualPoint::primal(vec![0.0; instance.dim()]);
    let policy = RestartPolicy::adaptive(0.25, PhiFunction::ShiftedSquare);
    let mut best = f64::INFINITY;
    let out = crate::restart::run_restarted(&mut agd, start, &policy, &StoppingRule::budget(20_000), |w| {
        let f = instance.value(&w.x);
        best = best.min(f);
        f
    })?;
    Ok(best.min(out.best_residual))
}
