//! Lanczos iteration with full reorthogonalization for the lowest part of the
//! spectrum of a sparse symmetric matrix.
//!
//! Eigenpairs are extracted one at a time. Each run starts from a seeded
//! random vector orthogonal to the pairs already locked and keeps its Krylov
//! basis orthogonal to them, so repeated eigenvalues are recovered as separate
//! copies instead of being hidden behind a single Ritz value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{dense_symmetric_eigen, fix_sign, order_degenerate, DenseMatrix};
use super::sparse::SparseMatrix;
use super::NumericsError;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Relative residual `|A x - theta x| / max(1, |A|)` accepted as converged.
    pub tolerance: f64,
    /// Krylov steps allowed per extracted eigenpair.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_iterations: 2000,
            seed: 0x5eed_1a2c,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// The `k` lowest eigenvalues, ascending.
pub fn sparse_lowest_eigen(m: &SparseMatrix, k: usize) -> Result<Vec<f64>, NumericsError> {
    Ok(sparse_lowest_eigenpairs(m, k)?.values)
}

pub fn sparse_lowest_eigenpairs(m: &SparseMatrix, k: usize) -> Result<Eigenpairs, NumericsError> {
    sparse_lowest_eigenpairs_with(m, k, &LanczosOptions::default())
}

pub fn sparse_lowest_eigenpairs_with(
    m: &SparseMatrix,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Eigenpairs, NumericsError> {
    let n = m.dim();
    if k > n {
        return Err(NumericsError::TooManyEigenvalues {
            requested: k,
            dimension: n,
        });
    }
    m.check_symmetric()?;
    let scale = norm_estimate(m).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);

    while locked.len() < k {
        let (theta, x) = lowest_in_complement(m, &locked, &mut rng, scale, opts)?;
        locked.push((theta, x));
    }

    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    order_degenerate(&mut locked, scale);
    let (values, vectors) = locked.into_iter().unzip();
    Ok(Eigenpairs { values, vectors })
}

fn norm_estimate(m: &SparseMatrix) -> f64 {
    // Largest absolute row sum bounds the spectral radius.
    (0..m.dim())
        .map(|r| m.row_entries(r).iter().map(|e| e.2.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Two passes of classical Gram-Schmidt against every vector in `against`.
fn orthogonalize<'a>(w: &mut [f64], against: impl Iterator<Item = &'a Vec<f64>> + Clone) {
    for _ in 0..2 {
        for q in against.clone() {
            let c = dot(q, w);
            axpy(w, -c, q);
        }
    }
}

fn random_start(n: usize, locked: &[(f64, Vec<f64>)], rng: &mut ChaCha8Rng) -> Result<Vec<f64>, NumericsError> {
    for _ in 0..16 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, locked.iter().map(|p| &p.1));
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|c| *c /= nv);
            return Ok(v);
        }
    }
    Err(NumericsError::NoConvergence {
        iterations: 0,
        residual: f64::NAN,
    })
}

fn lowest_in_complement(
    m: &SparseMatrix,
    locked: &[(f64, Vec<f64>)],
    rng: &mut ChaCha8Rng,
    scale: f64,
    opts: &LanczosOptions,
) -> Result<(f64, Vec<f64>), NumericsError> {
    let n = m.dim();
    let available = n - locked.len();
    let mut basis: Vec<Vec<f64>> = vec![random_start(n, locked, rng)?];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;

    for step in 0..opts.max_iterations.max(1) {
        let q = &basis[step];
        let mut w = m.matvec(q);
        let alpha = dot(q, &w);
        axpy(&mut w, -alpha, q);
        if step > 0 {
            axpy(&mut w, -betas[step - 1], &basis[step - 1]);
        }
        orthogonalize(&mut w, basis.iter().chain(locked.iter().map(|p| &p.1)));
        alphas.push(alpha);
        let beta = norm(&w);

        let size = step + 1;
        let exhausted = size >= available || beta <= 1e-12 * scale;
        let check = exhausted || size <= 8 || size % 4 == 0;
        if check {
            let (theta, s) = lowest_ritz(&alphas, &betas)?;
            let estimate = beta * s[size - 1].abs();
            last_residual = estimate;
            if exhausted || estimate <= opts.tolerance * scale {
                let mut x = vec![0.0; n];
                for (c, qi) in s.iter().zip(&basis) {
                    axpy(&mut x, *c, qi);
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|c| *c /= nx);
                fix_sign(&mut x);
                let theta = rayleigh(m, &x).unwrap_or(theta);
                return Ok((theta, x));
            }
        }

        betas.push(beta);
        w.iter_mut().for_each(|c| *c /= beta);
        basis.push(w);
    }
    Err(NumericsError::NoConvergence {
        iterations: opts.max_iterations,
        residual: last_residual,
    })
}

fn rayleigh(m: &SparseMatrix, x: &[f64]) -> Option<f64> {
    let v = dot(x, &m.matvec(x));
    v.is_finite().then_some(v)
}

fn lowest_ritz(alphas: &[f64], betas: &[f64]) -> Result<(f64, Vec<f64>), NumericsError> {
    let k = alphas.len();
    let mut t = DenseMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = dense_symmetric_eigen(&t)?;
    Ok((eig.values[0], eig.vector(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SparseBuilder;

    fn random_symmetric(n: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = SparseBuilder::new(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                b.push(i, j, v);
                if i != j {
                    b.push(j, i, v);
                }
            }
        }
        b.finalize()
    }

    #[test]
    fn diagonal_case() {
        let m = SparseMatrix::from_diagonal(&[5.0, 1.0, 3.0]);
        let vals = sparse_lowest_eigen(&m, 2).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_matches_dense() {
        let m = random_symmetric(50, 7);
        let dense = dense_symmetric_eigen(&m.to_dense()).unwrap();
        let pairs = sparse_lowest_eigenpairs(&m, 4).unwrap();
        for k in 0..4 {
            assert!((pairs.values[k] - dense.values[k]).abs() < 1e-8);
            let mv = m.matvec(&pairs.vectors[k]);
            let res = mv
                .iter()
                .zip(&pairs.vectors[k])
                .map(|(a, b)| (a - pairs.values[k] * b).abs())
                .fold(0.0, f64::max);
            assert!(res < 1e-9, "residual {res}");
        }
    }

    #[test]
    fn chain_laplacian_ground_state() {
        let n = 10;
        let mut b = SparseBuilder::new(n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        let vals = sparse_lowest_eigen(&b.finalize(), 1).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / 11.0).cos();
        assert!((vals[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn repeated_eigenvalues_are_all_found() {
        let m = SparseMatrix::from_diagonal(&[2.0, 1.0, 2.0, 3.0, 2.0, 4.0]);
        let vals = sparse_lowest_eigen(&m, 4).unwrap();
        let expected = [1.0, 2.0, 2.0, 2.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-10, "{vals:?}");
        }
    }

    #[test]
    fn full_spectrum_of_small_matrix() {
        let m = random_symmetric(12, 3);
        let dense = dense_symmetric_eigen(&m.to_dense()).unwrap();
        let vals = sparse_lowest_eigen(&m, 12).unwrap();
        for (a, b) in vals.iter().zip(&dense.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_too_many() {
        let m = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        assert!(matches!(
            sparse_lowest_eigen(&m, 3),
            Err(NumericsError::TooManyEigenvalues {
                requested: 3,
                dimension: 2
            })
        ));
    }

    #[test]
    fn seeded_runs_are_bitwise_reproducible() {
        let m = random_symmetric(30, 11);
        let a = sparse_lowest_eigenpairs(&m, 3).unwrap();
        let b = sparse_lowest_eigenpairs(&m, 3).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }
}
