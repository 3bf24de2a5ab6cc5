use std::fmt;
use std::ops::{Index, IndexMut};

use super::NumericsError;

/// Absolute symmetry tolerance, scaled by the largest entry when that exceeds one.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Row-major dense real matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, NumericsError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(NumericsError::Shape(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = Self {
            rows: n_rows,
            cols: n_cols,
            data,
        };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length does not match matrix columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest `|m[i][j] - m[j][i]|`, with its location.
    pub fn max_asymmetry(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    pub(crate) fn check_finite(&self) -> Result<(), NumericsError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(NumericsError::NonFinite {
                row: k / self.cols.max(1),
                col: k % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    /// Rejects non-square, non-finite or asymmetric input.
    pub fn check_symmetric(&self) -> Result<(), NumericsError> {
        if !self.is_square() {
            return Err(NumericsError::Shape(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        self.check_finite()?;
        let (asym, row, col) = self.max_asymmetry();
        if asym > symmetry_tolerance(self.max_abs()) {
            return Err(NumericsError::NotSymmetric {
                max_asymmetry: asym,
                row,
                col,
            });
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub(crate) fn symmetry_tolerance(scale: f64) -> f64 {
    SYMMETRY_TOLERANCE * scale.max(1.0)
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Eigen-decomposition of a real symmetric matrix. Eigenvectors are the
/// columns of `vectors`, paired with `values` in ascending order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Full eigen-decomposition of a symmetric matrix.
///
/// Values come back ascending. Each eigenvector is flipped so that its first
/// component with magnitude above `1e-10` is positive, and vectors sharing a
/// (numerically) degenerate eigenvalue are ordered lexicographically.
pub fn dense_symmetric_eigen(m: &DenseMatrix) -> Result<SymmetricEigen, NumericsError> {
    m.check_symmetric()?;
    let n = m.rows();
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    // Symmetrize exactly so the solver never sees rounding-level asymmetry.
    let na = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let eig = nalgebra::SymmetricEigen::try_new(na, f64::EPSILON, 0).ok_or(NumericsError::NoConvergence {
        iterations: 0,
        residual: f64::NAN,
    })?;

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            fix_sign(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    order_degenerate(&mut pairs, m.max_abs());

    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| pairs[j].1[i]);
    Ok(SymmetricEigen { values, vectors })
}

/// Makes the first component with `|c| > 1e-10` positive.
pub fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().copied().find(|c| c.abs() > 1e-10) {
        if first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

pub(crate) fn order_degenerate(pairs: &mut [(f64, Vec<f64>)], scale: f64) {
    let tol = 1e-10 * scale.max(1.0);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= tol {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|a, b| {
                // Descending lexicographic order puts the vector with the larger
                // leading component first.
                for (x, y) in a.1.iter().zip(&b.1) {
                    if (x - y).abs() > 1e-10 {
                        return y.total_cmp(x);
                    }
                }
                std::cmp::Ordering::Equal
            });
        }
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_orthonormality_error(v: &DenseMatrix) -> f64 {
        let gram = v.transpose().matmul(v).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn exchange_matrix() {
        let m = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let eig = dense_symmetric_eigen(&m).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let v0 = eig.vector(0);
        assert!(v0[0] > 0.0);
        assert!((v0[0] + v0[1]).abs() < 1e-14);
    }

    #[test]
    fn identity_is_degenerate_and_canonical() {
        let eig = dense_symmetric_eigen(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(eig.values.len(), 3);
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(max_orthonormality_error(&eig.vectors) < 1e-10);
        for k in 0..3 {
            let v = eig.vector(k);
            let lead = v.iter().find(|c| c.abs() > 1e-10).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn two_site_pair_matrix() {
        let s = std::f64::consts::SQRT_2;
        let m = DenseMatrix::from_rows(&[[-4.0, 0.0, -s], [0.0, -4.0, -s], [-s, -s, 0.0]]).unwrap();
        let eig = dense_symmetric_eigen(&m).unwrap();
        assert!((eig.values[0] + 2.0 + 2.0 * s).abs() < 1e-12);
        assert!((eig.values[1] + 4.0).abs() < 1e-12);
        assert!((eig.values[2] + 2.0 - 2.0 * s).abs() < 1e-12);
        for (k, &lambda) in eig.values.iter().enumerate() {
            let v = eig.vector(k);
            let mv = m.matvec(&v);
            for i in 0..3 {
                assert!((mv[i] - lambda * v[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.5, 1.0]]).unwrap();
        match dense_symmetric_eigen(&m) {
            Err(NumericsError::NotSymmetric {
                max_asymmetry,
                row,
                col,
            }) => {
                assert!((max_asymmetry - 0.5).abs() < 1e-15);
                assert_eq!((row, col), (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(dense_symmetric_eigen(&m), Err(NumericsError::Shape(_))));
    }
}
