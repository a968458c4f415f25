use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::SparseMatrix;
use crate::problems::{BoxLpInstance, GameFamily, Loss};

/// Problem description stored as JSON. Stochastic kinds carry their seed
/// and can be regenerated; explicit payloads, when present, take precedence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceFile {
    MatrixGame {
        seed: u64,
        rows: usize,
        cols: usize,
        family: GameFamily,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<SparseMatrix>,
    },
    BoxLp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// Transportation generator size; ignored when `lp` is given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sources: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sinks: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lp: Option<BoxLpInstance>,
    },
    Bilinear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        rows: usize,
        cols: usize,
        /// Nonzero singular values of the generated matrix.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        singular_values: Option<Vec<f64>>,
        /// Dense row-major payload `A`, with `b` and `c`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Vec<f64>>,
    },
    Regression {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        loss: Loss,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cols: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<f64>,
        /// LIBSVM file, relative paths resolved against the JSON file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        libsvm: Option<String>,
        /// Best known objective value, used as the residual reference.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        best_known: Option<f64>,
    },
    HardExample {
        n: usize,
        delta: f64,
        alpha: f64,
    },
    Quadratic {
        seed: u64,
        n: usize,
        alpha: f64,
        smoothness: f64,
    },
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InstanceFile::MatrixGame { .. } => "matrix_game",
            InstanceFile::BoxLp { .. } => "box_lp",
            InstanceFile::Bilinear { .. } => "bilinear",
            InstanceFile::Regression { .. } => "regression",
            InstanceFile::HardExample { .. } => "hard_example",
            InstanceFile::Quadratic { .. } => "quadratic",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let lp = BoxLpInstance::generate_transportation(2, 3, 4).unwrap();
        let cases = vec![
            InstanceFile::MatrixGame {
                seed: 1,
                rows: 3,
                cols: 4,
                family: GameFamily::UniformNegative,
                matrix: Some(SparseMatrix::identity(3)),
            },
            InstanceFile::BoxLp {
                seed: Some(4),
                sources: None,
                sinks: None,
                lp: Some(lp),
            },
            InstanceFile::Bilinear {
                seed: None,
                rows: 1,
                cols: 2,
                singular_values: None,
                a: Some(vec![1.0, 0.1]),
                b: Some(vec![0.0]),
                c: Some(vec![0.3, 1.0 / 3.0]),
            },
            InstanceFile::Regression {
                seed: Some(2),
                loss: Loss::Logistic,
                lambda: 1e-3,
                rows: Some(10),
                cols: Some(5),
                density: Some(0.5),
                libsvm: None,
                best_known: None,
            },
            InstanceFile::HardExample {
                n: 500,
                delta: 1e-4,
                alpha: 1e-4,
            },
        ];
        for case in cases {
            let text = case.to_json().unwrap();
            assert_eq!(InstanceFile::from_json(&text).unwrap(), case, "{text}");
        }
    }

    #[test]
    fn infinite_bounds_are_null() {
        let lp = BoxLpInstance::generate_transportation(3, 3, 0).unwrap();
        let text = serde_json::to_string(&lp).unwrap();
        assert!(text.contains("null"));
        let back: BoxLpInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, lp);
    }

    #[test]
    fn tagged_kind() {
        let f = InstanceFile::from_json(r#"{"kind": "hard_example", "n": 3, "delta": 0.1, "alpha": 0.5}"#).unwrap();
        assert_eq!(f.kind(), "hard_example");
        assert!(InstanceFile::from_json(r#"{"kind": "nope"}"#).is_err());
    }
}
