use std::io::BufRead;

use crate::error::{Error, Result};
use crate::numerics::SparseMatrix;
use crate::problems::{preprocess_columns, Preprocessed};

/// One line of a LIBSVM file; feature indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmRecord {
    pub label: f64,
    pub features: Vec<(usize, f64)>,
}

/// Raw parse result: one row per record, columns `0..n_features` for
/// 1-based indices `1..=n_features`.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmData {
    pub records: Vec<LibsvmRecord>,
    pub matrix: SparseMatrix,
    pub labels: Vec<f64>,
}

/// Parsed and preprocessed data ready for regression.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmDataset {
    pub matrix: SparseMatrix,
    pub labels: Vec<f64>,
    /// Zero-based original feature index of each retained column; the
    /// intercept (last column) is not listed.
    pub kept_columns: Vec<usize>,
    pub raw_features: usize,
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<LibsvmRecord>> {
    let content = line.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let err = |message: String| Error::Parse { line: lineno, message };
    let mut tokens = content.split_whitespace();
    let label_tok = tokens.next().expect("nonempty line has a token");
    let label: f64 = label_tok
        .parse()
        .map_err(|_| err(format!("bad label `{label_tok}`")))?;
    if !label.is_finite() {
        return Err(err(format!("non-finite label `{label_tok}`")));
    }
    let mut features = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected `index:value`, found `{tok}`")))?;
        let idx: usize = idx.parse().map_err(|_| err(format!("bad feature index `{idx}`")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based".into()));
        }
        if idx <= last {
            return Err(err(format!("feature index {idx} does not increase (previous {last})")));
        }
        let val: f64 = val.parse().map_err(|_| err(format!("bad feature value `{val}`")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite feature value `{val}`")));
        }
        last = idx;
        features.push((idx, val));
    }
    Ok(Some(LibsvmRecord { label, features }))
}

/// Parses LIBSVM text. Blank lines and `#` comments are skipped. The
/// feature count is the largest index seen unless `n_features` is larger.
pub fn parse_libsvm<R: BufRead>(reader: R, n_features: Option<usize>) -> Result<LibsvmData> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(rec) = parse_line(&line, i + 1)? {
            records.push(rec);
        }
    }
    let seen = records
        .iter()
        .filter_map(|r| r.features.last().map(|f| f.0))
        .max()
        .unwrap_or(0);
    let ncols = seen.max(n_features.unwrap_or(0));
    let mut triplets = Vec::new();
    for (i, r) in records.iter().enumerate() {
        triplets.extend(r.features.iter().map(|&(j, v)| (i, j - 1, v)));
    }
    let matrix = SparseMatrix::from_triplets(records.len(), ncols, &triplets)?;
    let labels = records.iter().map(|r| r.label).collect();
    Ok(LibsvmData {
        records,
        matrix,
        labels,
    })
}

/// Parses, then removes empty columns, appends an intercept and normalizes
/// columns, in that order.
pub fn load_libsvm<R: BufRead>(reader: R) -> Result<LibsvmDataset> {
    let data = parse_libsvm(reader, None)?;
    if data.labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no records".into(),
        });
    }
    let raw_features = data.matrix.ncols();
    let Preprocessed { matrix, kept_columns } = preprocess_columns(&data.matrix)?;
    Ok(LibsvmDataset {
        matrix,
        labels: data.labels,
        kept_columns,
        raw_features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_record() {
        let d = parse_libsvm("1 1:0.5 3:2.0\n".as_bytes(), None).unwrap();
        assert_eq!(
            d.records,
            vec![LibsvmRecord {
                label: 1.0,
                features: vec![(1, 0.5), (3, 2.0)]
            }]
        );
        assert_eq!(d.matrix.to_dense(), nalgebra::DMatrix::from_row_slice(1, 3, &[0.5, 0.0, 2.0]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_libsvm("1 1:1\n\n-1 2:1 2:3\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_libsvm("1 1:1\nfoo 1:2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_libsvm("1 0:1\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_libsvm("1 3\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn preprocessing_removes_empty_columns() {
        let ds = load_libsvm("1 2:3.0\n-1 2:4.0\n".as_bytes()).unwrap();
        let ds3 = {
            let data = parse_libsvm("1 2:3.0\n-1 2:4.0\n".as_bytes(), Some(3)).unwrap();
            preprocess_columns(&data.matrix).unwrap()
        };
        assert_eq!(ds.matrix.ncols(), 2);
        assert_eq!(ds3.matrix.ncols(), 2);
        assert_eq!(ds3.kept_columns, vec![1]);
        let dense = ds.matrix.to_dense();
        assert!((dense[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((dense[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((dense[(0, 1)] - 0.5f64.sqrt()).abs() < 1e-15);
        for n in ds.matrix.column_norms() {
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
