use std::collections::BTreeMap;
use std::io::Write;

use super::dense::{symmetry_tolerance, DenseMatrix};
use super::NumericsError;

/// Entries with magnitude below this are removed at finalization.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Accumulates coordinate triples. Duplicates are summed at [`finalize`] in
/// insertion order, so a deterministic insertion order gives bit-identical
/// results.
///
/// [`finalize`]: SparseBuilder::finalize
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    dim: usize,
    triples: Vec<(usize, usize, f64)>,
}

impl SparseBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            triples: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.dim && col < self.dim,
            "({row}, {col}) outside {}x{}",
            self.dim,
            self.dim
        );
        self.triples.push((row, col, value));
    }

    pub fn extend(&mut self, triples: impl IntoIterator<Item = (usize, usize, f64)>) {
        for (r, c, v) in triples {
            self.push(r, c, v);
        }
    }

    pub fn finalize(self) -> SparseMatrix {
        self.finalize_with_tolerance(DROP_TOLERANCE)
    }

    pub fn finalize_with_tolerance(mut self, drop_tolerance: f64) -> SparseMatrix {
        // Stable sort keeps insertion order among duplicates.
        self.triples.sort_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(self.triples.len());
        for (r, c, v) in self.triples {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2.abs() >= drop_tolerance);
        SparseMatrix::from_sorted(self.dim, entries)
    }
}

/// Square sparse matrix stored as row-major sorted coordinate triples with a
/// row-pointer index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
    row_ptr: Vec<usize>,
}

impl SparseMatrix {
    fn from_sorted(dim: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        let mut row_ptr = vec![0; dim + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, entries, row_ptr }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_sorted(dim, Vec::new())
    }

    pub fn from_triples(dim: usize, triples: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut b = SparseBuilder::new(dim);
        b.extend(triples);
        b.finalize()
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_triples(diag.len(), diag.iter().enumerate().map(|(i, &d)| (i, i, d)))
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::Shape(format!(
                "expected square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut b = SparseBuilder::new(n);
        for i in 0..n {
            for j in 0..n {
                b.push(i, j, m[(i, j)]);
            }
        }
        Ok(b.finalize())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Row-major sorted triples.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn row_entries(&self, row: usize) -> &[(usize, usize, f64)] {
        &self.entries[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let slice = self.row_entries(row);
        match slice.binary_search_by_key(&col, |e| e.1) {
            Ok(k) => slice[k].2,
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "vector length does not match dimension");
        (0..self.dim)
            .map(|r| self.row_entries(r).iter().fold(0.0, |acc, &(_, c, x)| acc + x * v[c]))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triples(self.dim, self.entries.iter().map(|&(r, c, v)| (c, r, v)))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_triples(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * factor)))
    }

    /// Entry-wise sum of several matrices of equal dimension, in argument order.
    pub fn sum<'a>(dim: usize, parts: impl IntoIterator<Item = &'a SparseMatrix>) -> Self {
        let mut b = SparseBuilder::new(dim);
        for p in parts {
            assert_eq!(p.dim, dim, "dimension mismatch in sparse sum");
            b.extend(p.entries.iter().copied());
        }
        b.finalize()
    }

    pub fn sub(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in sparse difference");
        let mut b = SparseBuilder::new(self.dim);
        b.extend(self.entries.iter().copied());
        b.extend(other.entries.iter().map(|&(r, c, v)| (r, c, -v)));
        b.finalize_with_tolerance(0.0)
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in sparse product");
        let mut b = SparseBuilder::new(self.dim);
        for r in 0..self.dim {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for &(_, k, a) in self.row_entries(r) {
                for &(_, c, x) in other.row_entries(k) {
                    *acc.entry(c).or_insert(0.0) += a * x;
                }
            }
            b.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        b.finalize_with_tolerance(0.0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc + e.2 * e.2).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |acc, e| acc.max(e.2.abs()))
    }

    /// Largest `|m[r][c] - m[c][r]|` over stored entries, with its location.
    pub fn max_asymmetry(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for &(r, c, v) in &self.entries {
            let d = (v - self.get(c, r)).abs();
            if d > worst.0 {
                worst = (d, r.min(c), r.max(c));
            }
        }
        worst
    }

    pub fn check_symmetric(&self) -> Result<(), NumericsError> {
        if let Some(e) = self.entries.iter().find(|e| !e.2.is_finite()) {
            return Err(NumericsError::NonFinite { row: e.0, col: e.1 });
        }
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

    /// Writes `row,col,value` lines (with header) using 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for &(r, c, v) in &self.entries {
            writeln!(out, "{r},{c},{}", format_sig17(v))?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits, e.g. `-4.8284271247461903e0`.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_merge_and_small_values_drop() {
        let m = SparseMatrix::from_triples(3, [(2, 1, 1.0), (0, 0, 2.0), (2, 1, 0.5), (1, 1, 1e-14)]);
        assert_eq!(m.entries(), &[(0, 0, 2.0), (2, 1, 1.5)]);
        assert_eq!(m.get(2, 1), 1.5);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn cancelling_duplicates_vanish() {
        let m = SparseMatrix::from_triples(2, [(0, 1, 0.3), (0, 1, -0.3)]);
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn matvec_and_transpose() {
        let m = SparseMatrix::from_triples(2, [(0, 1, 2.0), (1, 0, 3.0), (1, 1, 1.0)]);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![2.0, 4.0]);
        let t = m.transpose();
        assert_eq!(t.get(1, 0), 2.0);
        assert_eq!(m.max_asymmetry().0, 1.0);
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseMatrix::from_triples(3, [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 3.0)]);
        let b = SparseMatrix::from_triples(3, [(1, 1, 4.0), (2, 2, 5.0), (0, 2, 1.0)]);
        let sparse = a.matmul(&b).to_dense();
        let dense = a.to_dense().matmul(&b.to_dense()).unwrap();
        assert_eq!(sparse, dense);
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let m = SparseMatrix::from_triples(2, [(0, 1, 1.0 / 3.0)]);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "row,col,value\n0,1,3.3333333333333331e-1\n");
        let parsed: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }
}
