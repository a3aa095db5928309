//! Dense symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoposError, Result};

/// A real symmetric matrix. Only the upper triangle is ever read from
/// inputs; the lower triangle is mirrored, so symmetry is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds a matrix from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut inner = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Self { inner }
    }

    /// Builds a matrix from row vectors. Rows must form a square array whose
    /// lower and upper triangles agree to within `1e-9` relative.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(CoposError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                    return Err(CoposError::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// Symmetrizes an arbitrary square matrix as `(A + A^T) / 2`.
    pub fn from_dmatrix_symmetrized(a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        Self::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            inner: DMatrix::from_element(n, n, 1.0),
        }
    }

    /// The 5x5 Horn matrix, cycle-ordered (+1 on the diagonal and between
    /// cyclic neighbours, -1 elsewhere).
    pub fn horn() -> Self {
        Self::from_fn(5, |i, j| {
            let d = (j + 5 - i) % 5;
            if d == 0 || d == 1 || d == 4 {
                1.0
            } else {
                -1.0
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `x^T M x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.inner[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Bilinear form `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                acc += x[i] * self.inner[(i, j)] * y[j];
            }
        }
        acc
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        SymmetricEigen::new(self.inner.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_entry(&self) -> f64 {
        self.inner.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(CoposError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// `M + s I`.
    pub fn shift_diagonal(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            out.inner[(i, i)] += s;
        }
        out
    }

    /// `D M D` for the diagonal matrix `D = diag(d)`.
    pub fn congruence_diag(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.dim() {
            return Err(CoposError::DimensionMismatch {
                expected: self.dim(),
                got: d.len(),
            });
        }
        Ok(Self::from_fn(self.dim(), |i, j| d[i] * self.get(i, j) * d[j]))
    }

    /// Block-diagonal `diag(self, other)`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        Self::from_fn(n + m, |i, j| {
            if j < n {
                self.get(i, j)
            } else if i >= n {
                other.get(i - n, j - n)
            } else {
                0.0
            }
        })
    }

    /// Principal submatrix on `idx`.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Parses a matrix from JSON (`[[…],…]`) or plain text (first line `n`,
/// then `n` rows of whitespace- or comma-separated numbers).
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| CoposError::Parse("empty matrix file".into()))?
        .parse()
        .map_err(|_| CoposError::Parse("first line must be the dimension".into()))?;
    let mut rows = Vec::with_capacity(n);
    for line in lines {
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CoposError::Parse(format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(CoposError::Parse(format!(
            "expected {n} rows, found {}",
            rows.len()
        )));
    }
    SymMatrix::from_rows(&rows)
}

/// Plain-text form accepted by [`parse_matrix`].
pub fn matrix_to_text(m: &SymMatrix) -> String {
    let mut out = format!("{}\n", m.dim());
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horn_layout() {
        let h = SymMatrix::horn();
        let expected = [
            [1.0, 1.0, -1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0, -1.0, -1.0],
            [-1.0, 1.0, 1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0, 1.0, 1.0],
        ];
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(h.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_rows() {
        let rows = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        assert!(SymMatrix::from_rows(&rows).is_err());
        let rows = vec![vec![1.0, 2.0]];
        assert!(SymMatrix::from_rows(&rows).is_err());
    }

    #[test]
    fn congruence_and_sum() {
        let h = SymMatrix::horn();
        let d = [1.0, 2.0, 1.0, 1.0, 1.0];
        let dhd = h.congruence_diag(&d).unwrap();
        assert_eq!(dhd.get(1, 1), 4.0);
        assert_eq!(dhd.get(0, 1), 2.0);
        let big = h.direct_sum(&SymMatrix::zeros(2));
        assert_eq!(big.dim(), 7);
        assert_eq!(big.get(6, 6), 0.0);
        assert_eq!(big.get(4, 0), 1.0);
    }

    #[test]
    fn text_and_json_forms() {
        let h = SymMatrix::horn();
        assert_eq!(parse_matrix(&matrix_to_text(&h)).unwrap(), h);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(parse_matrix(&json).unwrap(), h);
        assert!(parse_matrix("2\n1 0\n").is_err());
    }

    #[test]
    fn min_eigenvalue_of_identity() {
        assert!((SymMatrix::identity(4).min_eigenvalue() - 1.0).abs() < 1e-12);
        assert!(SymMatrix::horn().min_eigenvalue() < 0.0);
    }
}
