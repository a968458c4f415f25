use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and every stored
/// value is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CsrParts", into = "CsrParts")]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CsrParts {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<CsrParts> for SparseMatrix {
    type Error = Error;

    fn try_from(p: CsrParts) -> Result<Self> {
        SparseMatrix::new(p.nrows, p.ncols, p.row_offsets, p.col_indices, p.values)
    }
}

impl From<SparseMatrix> for CsrParts {
    fn from(m: SparseMatrix) -> Self {
        CsrParts {
            nrows: m.nrows,
            ncols: m.ncols,
            row_offsets: m.row_offsets,
            col_indices: m.col_indices,
            values: m.values,
        }
    }
}

impl SparseMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 || row_offsets[0] != 0 {
            return Err(Error::invalid("row offsets must have nrows + 1 entries starting at 0"));
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::invalid("row offsets, column indices and values disagree"));
        }
        for r in 0..nrows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::invalid(format!("row offsets decrease at row {r}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.iter().any(|&c| c >= ncols) {
                return Err(Error::invalid(format!("column index out of bounds in row {r}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "column indices not strictly increasing in row {r}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite matrix entry"));
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= nrows || c >= ncols {
                return Err(Error::invalid(format!("triplet ({r}, {c}) out of bounds")));
            }
        }
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut rows = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            if let (Some(&lr), Some(&lc)) = (rows.last(), col_indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col_indices.push(c);
            values.push(v);
        }
        let keep: Vec<bool> = values.iter().map(|&v| v != 0.0).collect();
        let mut ci = Vec::with_capacity(values.len());
        let mut vs = Vec::with_capacity(values.len());
        for (k, &r) in rows.iter().enumerate() {
            if keep[k] {
                row_offsets[r + 1] += 1;
                ci.push(col_indices[k]);
                vs.push(values[k]);
            }
        }
        for r in 0..nrows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Self::new(nrows, ncols, row_offsets, ci, vs)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &triplets)
    }

    /// Row-major dense input, convenient in tests.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::invalid("ragged rows"));
        }
        let dense = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
        Self::from_dense(&dense)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `out = A x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in A x");
        assert_eq!(out.len(), self.nrows, "dimension mismatch in A x");
        for (i, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            // Strictly increasing columns: a full row is contiguous.
            *o = if cols.len() == self.ncols {
                super::dot(vals, x)
            } else {
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            };
        }
    }

    /// `out = Aᵀ y`
    pub fn mul_vec_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.nrows, "dimension mismatch in A^T y");
        assert_eq!(out.len(), self.ncols, "dimension mismatch in A^T y");
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            if cols.len() == self.ncols {
                super::axpy(yi, vals, out);
                continue;
            }
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * yi;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        self.mul_vec_transpose_into(y, &mut out);
        out
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets).expect("transpose of valid matrix")
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (&c, &v) in self.col_indices.iter().zip(&self.values) {
            sums[c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Column Euclidean norms.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.ncols];
        for (&c, &v) in self.col_indices.iter().zip(&self.values) {
            sq[c] += v * v;
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Multiplies column `j` by `scale[j]`.
    pub fn scale_columns(&mut self, scale: &[f64]) {
        assert_eq!(scale.len(), self.ncols);
        for (&c, v) in self.col_indices.iter().zip(self.values.iter_mut()) {
            *v *= scale[c];
        }
    }
}

/// Componentwise bounds `lower <= x <= upper`; infinite entries are allowed
/// (`-inf` below, `+inf` above).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundsParts", into = "BoundsParts")]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// JSON has no infinities; a missing bound is `null`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct BoundsParts {
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
}

impl TryFrom<BoundsParts> for BoxBounds {
    type Error = Error;

    fn try_from(p: BoundsParts) -> Result<Self> {
        BoxBounds::new(
            p.lower.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect(),
            p.upper.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
        )
    }
}

impl From<BoxBounds> for BoundsParts {
    fn from(b: BoxBounds) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        BoundsParts {
            lower: b.lower.into_iter().map(finite).collect(),
            upper: b.upper.into_iter().map(finite).collect(),
        }
    }
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("bound vectors differ in length"));
        }
        for (j, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(Error::invalid(format!("invalid bounds [{l}, {u}] at index {j}")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn nonnegative(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = SparseMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (0, 0, 0.0)])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.row(1), (&[2usize][..], &[4.0][..]));
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![2.0, 4.0]);
        assert_eq!(m.mul_vec_transpose(&[1.0, 1.0]), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn rejects_unsorted_columns() {
        assert!(SparseMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::new(1, 2, vec![0, 1], vec![5], vec![1.0]).is_err());
        assert!(SparseMatrix::new(1, 2, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn transpose_and_norms() {
        let m = SparseMatrix::from_rows(&[vec![1.0, -2.0], vec![0.0, 3.0]]).unwrap();
        let t = m.transpose();
        assert_eq!(t.to_dense(), m.to_dense().transpose());
        assert_eq!(m.norm_one(), 5.0);
        assert_eq!(m.norm_inf(), 3.0);
    }

    #[test]
    fn serde_validates() {
        let m = SparseMatrix::identity(3);
        let s = serde_json::to_string(&m).unwrap();
        let back: SparseMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"nrows":1,"ncols":1,"row_offsets":[0,1],"col_indices":[3],"values":[1.0]}"#;
        assert!(serde_json::from_str::<SparseMatrix>(bad).is_err());
    }

    #[test]
    fn bounds_validation() {
        assert!(BoxBounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxBounds::new(vec![f64::INFINITY], vec![f64::INFINITY]).is_err());
        assert!(BoxBounds::new(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).is_ok());
    }
}
