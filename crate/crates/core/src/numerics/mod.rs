//! Dense and sparse real linear algebra used throughout the crate.

mod dense;
mod lanczos;
mod sparse;

pub use dense::{dense_symmetric_eigen, fix_sign, DenseMatrix, SymmetricEigen, SYMMETRY_TOLERANCE};
pub use lanczos::{
    sparse_lowest_eigen, sparse_lowest_eigenpairs, sparse_lowest_eigenpairs_with, Eigenpairs, LanczosOptions,
};
pub use sparse::{format_sig17, SparseBuilder, SparseMatrix, DROP_TOLERANCE};

#[derive(Debug, Clone, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e} at ({row}, {col})")]
    NotSymmetric { max_asymmetry: f64, row: usize, col: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("requested {requested} eigenvalues from a matrix of dimension {dimension}")]
    TooManyEigenvalues { requested: usize, dimension: usize },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}
