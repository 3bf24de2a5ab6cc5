//! Unbound single-particle modes, the one- and two-body tensors expressed in
//! them, the pair Hamiltonian on the symmetric two-particle subspace, and the
//! bound (composite) states it supports.

use std::collections::HashSet;
use std::fmt;

use crate::numerics::{dense_symmetric_eigen, DenseMatrix, NumericsError, SYMMETRY_TOLERANCE};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ModeSpaceError {
    #[error("mode basis must contain at least one mode")]
    EmptyBasis,
    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("two-body tensor violates {symmetry} symmetry: |T[{m},{n},{p},{q}] - partner| = {violation:e}")]
    TensorSymmetry {
        symmetry: &'static str,
        m: usize,
        n: usize,
        p: usize,
        q: usize,
        violation: f64,
    },
    #[error("one-body tensor: {0}")]
    OneBody(NumericsError),
    #[error("requested {requested} bound states but the pair subspace has dimension {dimension}")]
    TooManyBoundStates { requested: usize, dimension: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("negative bound-state margin {0}")]
    NegativeMargin(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Labels of the unbound single-particle modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBasis {
    labels: Vec<String>,
}

impl ModeBasis {
    pub fn new(labels: Vec<String>) -> Result<Self, ModeSpaceError> {
        if labels.is_empty() {
            return Err(ModeSpaceError::EmptyBasis);
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ModeSpaceError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Labels `m0, m1, ...`.
    pub fn indexed(count: usize) -> Result<Self, ModeSpaceError> {
        Self::new((0..count).map(|i| format!("m{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Matrix elements `O[m][n] = <psi_m|O|psi_n>` of the one-body operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyTensor {
    matrix: DenseMatrix,
}

impl OneBodyTensor {
    pub fn new(matrix: DenseMatrix) -> Result<Self, ModeSpaceError> {
        matrix.check_symmetric().map_err(ModeSpaceError::OneBody)?;
        if matrix.rows() == 0 {
            return Err(ModeSpaceError::EmptyBasis);
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.matrix[(m, n)]
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// `U^T O U` for an orthogonal `U` whose columns are the new modes.
    pub fn transform(&self, u: &DenseMatrix) -> Result<Self, ModeSpaceError> {
        let rotated = u.transpose().matmul(&self.matrix)?.matmul(u)?;
        let n = rotated.rows();
        // Re-symmetrize away rounding.
        let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (rotated[(i, j)] + rotated[(j, i)]));
        Self::new(sym)
    }

    /// Lowest eigenvalue of the one-body matrix.
    pub fn lowest_energy(&self) -> Result<f64, ModeSpaceError> {
        Ok(dense_symmetric_eigen(&self.matrix)?.values[0])
    }
}

/// Two-body interaction tensor `T4[m,n,p,q] = <psi_m(1) psi_n(2)|T(1,2)|psi_p(1) psi_q(2)>`,
/// stored row-major with `q` fastest.
#[derive(Clone, PartialEq)]
pub struct TwoBodyTensor {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for TwoBodyTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoBodyTensor(dim={}, max|T|={:e})", self.dim, self.max_abs())
    }
}

impl TwoBodyTensor {
    /// Validates particle-exchange and Hermitian symmetry within `1e-12` (scaled).
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, ModeSpaceError> {
        if dim == 0 {
            return Err(ModeSpaceError::EmptyBasis);
        }
        if data.len() != dim.pow(4) {
            return Err(ModeSpaceError::Dimension(format!(
                "two-body tensor needs {} entries for {dim} modes, got {}",
                dim.pow(4),
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(ModeSpaceError::Dimension(format!(
                "non-finite two-body entry at flat index {k}"
            )));
        }
        let t = Self { dim, data };
        t.check_symmetries()?;
        Ok(t)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    /// Averages an arbitrary tensor over the exchange and Hermitian symmetry group.
    pub fn symmetrized(dim: usize, raw: &[f64]) -> Result<Self, ModeSpaceError> {
        if raw.len() != dim.pow(4) {
            return Err(ModeSpaceError::Dimension(format!("expected {} entries", dim.pow(4))));
        }
        let idx = |m: usize, n: usize, p: usize, q: usize| ((m * dim + n) * dim + p) * dim + q;
        let mut data = vec![0.0; raw.len()];
        for m in 0..dim {
            for n in 0..dim {
                for p in 0..dim {
                    for q in 0..dim {
                        data[idx(m, n, p, q)] = 0.25
                            * (raw[idx(m, n, p, q)]
                                + raw[idx(n, m, q, p)]
                                + raw[idx(p, q, m, n)]
                                + raw[idx(q, p, n, m)]);
                    }
                }
            }
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn index(&self, m: usize, n: usize, p: usize, q: usize) -> usize {
        ((m * self.dim + n) * self.dim + p) * self.dim + q
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, p: usize, q: usize) -> f64 {
        self.data[self.index(m, n, p, q)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    fn check_symmetries(&self) -> Result<(), ModeSpaceError> {
        let tol = SYMMETRY_TOLERANCE * self.max_abs().max(1.0);
        let d = self.dim;
        for m in 0..d {
            for n in 0..d {
                for p in 0..d {
                    for q in 0..d {
                        let v = self.get(m, n, p, q);
                        let exchange = (v - self.get(n, m, q, p)).abs();
                        if exchange > tol {
                            return Err(ModeSpaceError::TensorSymmetry {
                                symmetry: "particle-exchange",
                                m,
                                n,
                                p,
                                q,
                                violation: exchange,
                            });
                        }
                        let herm = (v - self.get(p, q, m, n)).abs();
                        if herm > tol {
                            return Err(ModeSpaceError::TensorSymmetry {
                                symmetry: "Hermitian",
                                m,
                                n,
                                p,
                                q,
                                violation: herm,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Rotates all four indices into the basis given by the columns of `u`.
    pub fn transform(&self, u: &DenseMatrix) -> Result<Self, ModeSpaceError> {
        let d = self.dim;
        if u.rows() != d || u.cols() != d {
            return Err(ModeSpaceError::Dimension(format!(
                "basis change is {}x{}, tensor has {d} modes",
                u.rows(),
                u.cols()
            )));
        }
        // One index at a time: out[..., new, ...] = sum_old u[old, new] * in[..., old, ...].
        let mut cur = self.data.clone();
        for axis in 0..4 {
            let stride = d.pow(3 - axis as u32);
            let mut next = vec![0.0; cur.len()];
            for (flat, slot) in next.iter_mut().enumerate() {
                let new = (flat / stride) % d;
                let base = flat - new * stride;
                let mut acc = 0.0;
                for old in 0..d {
                    acc += u[(old, new)] * cur[base + old * stride];
                }
                *slot = acc;
            }
            cur = next;
        }
        let mut sym = vec![0.0; cur.len()];
        for m in 0..d {
            for n in 0..d {
                for p in 0..d {
                    for q in 0..d {
                        let i = self.index(m, n, p, q);
                        sym[i] = 0.25
                            * (cur[i]
                                + cur[self.index(n, m, q, p)]
                                + cur[self.index(p, q, m, n)]
                                + cur[self.index(q, p, n, m)]);
                    }
                }
            }
        }
        Self::new(d, sym)
    }
}

/// Validated bundle of mode labels with the tensors expressed in those modes.
#[derive(Debug, Clone)]
pub struct ModeSpace {
    basis: ModeBasis,
    one_body: OneBodyTensor,
    two_body: TwoBodyTensor,
}

impl ModeSpace {
    pub fn new(basis: ModeBasis, one_body: OneBodyTensor, two_body: TwoBodyTensor) -> Result<Self, ModeSpaceError> {
        if one_body.dim() != basis.len() || two_body.dim() != basis.len() {
            return Err(ModeSpaceError::Dimension(format!(
                "basis has {} modes, O has {}, T4 has {}",
                basis.len(),
                one_body.dim(),
                two_body.dim()
            )));
        }
        Ok(Self {
            basis,
            one_body,
            two_body,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn one_body(&self) -> &OneBodyTensor {
        &self.one_body
    }

    pub fn two_body(&self) -> &TwoBodyTensor {
        &self.two_body
    }

    /// Same tensors with the interaction multiplied by `factor`.
    pub fn with_scaled_interaction(&self, factor: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            one_body: self.one_body.clone(),
            two_body: self.two_body.scaled(factor),
        }
    }

    pub fn pair_hamiltonian(&self) -> Result<PairHamiltonian, ModeSpaceError> {
        build_pair_hamiltonian(&self.one_body, &self.two_body)
    }

    /// Builds `H(1,2)` and solves for its bound states.
    pub fn solve_bound_states(&self, policy: BoundPolicy) -> Result<CompositeSpectrum, ModeSpaceError> {
        solve_bound_states(&self.pair_hamiltonian()?, &self.one_body, policy)
    }
}

/// A symmetric operator on the bosonic two-particle subspace, in the basis of
/// normalized unordered pairs `{p, q}` with `p <= q` in lexicographic order.
#[derive(Debug, Clone)]
pub struct PairHamiltonian {
    mode_count: usize,
    pairs: Vec<(usize, usize)>,
    matrix: DenseMatrix,
}

fn unordered_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|p| (p..m).map(move |q| (p, q))).collect()
}

/// Normalization of `|{p,q}> = N (|pq> + |qp>)`.
fn pair_norm(p: usize, q: usize) -> f64 {
    if p == q {
        0.5
    } else {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

/// `<ab|O(1) + O(2) + T(1,2)|cd>` between ordered product states.
#[inline]
pub(crate) fn ordered_pair_element(
    o: &OneBodyTensor,
    t: &TwoBodyTensor,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> f64 {
    let mut v = t.get(a, b, c, d);
    if b == d {
        v += o.get(a, c);
    }
    if a == c {
        v += o.get(b, d);
    }
    v
}

/// Assembles `H(1,2) = O(1) + O(2) + T(1,2)` on the symmetric pair subspace.
pub fn build_pair_hamiltonian(o: &OneBodyTensor, t: &TwoBodyTensor) -> Result<PairHamiltonian, ModeSpaceError> {
    if o.dim() != t.dim() {
        return Err(ModeSpaceError::Dimension(format!(
            "O has {} modes, T4 has {}",
            o.dim(),
            t.dim()
        )));
    }
    let pairs = unordered_pairs(o.dim());
    let k = pairs.len();
    let mut matrix = DenseMatrix::zeros(k, k);
    for (i, &(m, n)) in pairs.iter().enumerate() {
        for (j, &(p, q)) in pairs.iter().enumerate().skip(i) {
            let mut v = 0.0;
            for (a, b) in [(m, n), (n, m)] {
                for (c, d) in [(p, q), (q, p)] {
                    v += ordered_pair_element(o, t, a, b, c, d);
                }
            }
            v *= pair_norm(m, n) * pair_norm(p, q);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(PairHamiltonian {
        mode_count: o.dim(),
        pairs,
        matrix,
    })
}

impl PairHamiltonian {
    /// Substitutes a caller-chosen symmetric operator for the default `h = H(1,2)`.
    pub fn custom(mode_count: usize, matrix: DenseMatrix) -> Result<Self, ModeSpaceError> {
        let pairs = unordered_pairs(mode_count);
        if matrix.rows() != pairs.len() || matrix.cols() != pairs.len() {
            return Err(ModeSpaceError::Dimension(format!(
                "pair operator must be {0}x{0} for {mode_count} modes",
                pairs.len()
            )));
        }
        matrix.check_symmetric()?;
        Ok(Self {
            mode_count,
            pairs,
            matrix,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn pair_index(&self, p: usize, q: usize) -> Option<usize> {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        self.pairs.binary_search(&(p, q)).ok()
    }
}

/// Which eigenstates of the pair operator count as composite particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundPolicy {
    /// States with energy below `edge - margin`. `None` uses
    /// `1e-8 * |edge| + 1e-12`.
    BelowEdge { margin: Option<f64> },
    /// The `k` lowest states regardless of the continuum edge.
    LowestK(usize),
}

impl Default for BoundPolicy {
    fn default() -> Self {
        BoundPolicy::BelowEdge { margin: None }
    }
}

pub fn default_margin(edge: f64) -> f64 {
    1e-8 * edge.abs() + 1e-12
}

/// Bound-state energies and the symmetric coefficient tensors
/// `c[p][q] = <phi(1,2)|psi_p(1) psi_q(2)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSpectrum {
    mode_count: usize,
    continuum_edge: f64,
    energies: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
}

impl CompositeSpectrum {
    pub fn empty(mode_count: usize, continuum_edge: f64) -> Self {
        Self {
            mode_count,
            continuum_edge,
            energies: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn continuum_edge(&self) -> f64 {
        self.continuum_edge
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, alpha: usize) -> f64 {
        self.energies[alpha]
    }

    /// Unchecked `c_alpha[p][q]`; panics when out of range.
    #[inline]
    pub fn coefficient(&self, alpha: usize, p: usize, q: usize) -> f64 {
        self.coefficients[alpha][p * self.mode_count + q]
    }

    /// Full `M x M` coefficient table of one composite.
    pub fn coefficients(&self, alpha: usize) -> &[f64] {
        &self.coefficients[alpha]
    }

    /// `<phi_alpha(1,2)|psi_p(1) psi_q(2)>`.
    pub fn pair_overlap(&self, alpha: usize, p: usize, q: usize) -> Result<f64, ModeSpaceError> {
        if alpha >= self.len() {
            return Err(ModeSpaceError::OutOfRange(format!(
                "composite index {alpha} (spectrum has {})",
                self.len()
            )));
        }
        if p >= self.mode_count || q >= self.mode_count {
            return Err(ModeSpaceError::OutOfRange(format!(
                "mode pair ({p}, {q}) with {} modes",
                self.mode_count
            )));
        }
        Ok(self.coefficient(alpha, p, q))
    }

    /// Keeps only the composites whose indices are listed.
    pub fn select(&self, keep: &[usize]) -> Self {
        Self {
            mode_count: self.mode_count,
            continuum_edge: self.continuum_edge,
            energies: keep.iter().map(|&a| self.energies[a]).collect(),
            coefficients: keep.iter().map(|&a| self.coefficients[a].clone()).collect(),
        }
    }
}

/// Diagonalizes `h` and keeps the eigenpairs selected by `policy`.
///
/// The continuum edge is twice the lowest eigenvalue of `O`, i.e. the minimum
/// energy of two free constituents.
pub fn solve_bound_states(
    h: &PairHamiltonian,
    one_body: &OneBodyTensor,
    policy: BoundPolicy,
) -> Result<CompositeSpectrum, ModeSpaceError> {
    let m = h.mode_count();
    if one_body.dim() != m {
        return Err(ModeSpaceError::Dimension(format!(
            "pair operator built for {m} modes, O has {}",
            one_body.dim()
        )));
    }
    let edge = 2.0 * one_body.lowest_energy()?;
    let eig = dense_symmetric_eigen(h.matrix())?;
    let selected: Vec<usize> = match policy {
        BoundPolicy::BelowEdge { margin } => {
            let margin = margin.unwrap_or_else(|| default_margin(edge));
            if margin < 0.0 {
                return Err(ModeSpaceError::NegativeMargin(margin));
            }
            (0..eig.values.len())
                .filter(|&k| eig.values[k] < edge - margin)
                .collect()
        }
        BoundPolicy::LowestK(k) => {
            if k > h.dim() {
                return Err(ModeSpaceError::TooManyBoundStates {
                    requested: k,
                    dimension: h.dim(),
                });
            }
            (0..k).collect()
        }
    };

    let mut energies = Vec::with_capacity(selected.len());
    let mut coefficients = Vec::with_capacity(selected.len());
    for k in selected {
        let v = eig.vector(k);
        let mut c = vec![0.0; m * m];
        for (i, &(p, q)) in h.pairs().iter().enumerate() {
            // |{p,q}> = N (|pq> + |qp>) puts weight N v on both orderings, 2 N v when p == q.
            let w = if p == q { v[i] } else { v[i] * pair_norm(p, q) };
            c[p * m + q] = w;
            c[q * m + p] = w;
        }
        energies.push(eig.values[k]);
        coefficients.push(c);
    }
    Ok(CompositeSpectrum {
        mode_count: m,
        continuum_edge: edge,
        energies,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two sites joined by one bond, contact interaction, site basis.
    fn two_site_site_basis(t: f64, u: f64) -> (OneBodyTensor, TwoBodyTensor) {
        let o = OneBodyTensor::new(DenseMatrix::from_rows(&[[0.0, -t], [-t, 0.0]]).unwrap()).unwrap();
        let mut data = vec![0.0; 16];
        data[0] = u;
        data[15] = u;
        (o, TwoBodyTensor::new(2, data).unwrap())
    }

    #[test]
    fn single_mode_pair_hamiltonian() {
        let o = OneBodyTensor::new(DenseMatrix::from_rows(&[[0.7]]).unwrap()).unwrap();
        let t = TwoBodyTensor::new(1, vec![-0.3]).unwrap();
        let h = build_pair_hamiltonian(&o, &t).unwrap();
        assert_eq!(h.dim(), 1);
        assert!((h.matrix()[(0, 0)] - (2.0 * 0.7 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn two_site_pair_hamiltonian_matches_hand_expansion() {
        let (o, t) = two_site_site_basis(1.0, -4.0);
        let h = build_pair_hamiltonian(&o, &t).unwrap();
        let s = std::f64::consts::SQRT_2;
        // Hand-expanded in the order {0,0}, {1,1}, {0,1}.
        let order = [
            h.pair_index(0, 0).unwrap(),
            h.pair_index(1, 1).unwrap(),
            h.pair_index(0, 1).unwrap(),
        ];
        let expected = [[-4.0, 0.0, -s], [0.0, -4.0, -s], [-s, -s, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h.matrix()[(order[i], order[j])] - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn free_empty_case() {
        let o = OneBodyTensor::new(DenseMatrix::zeros(3, 3)).unwrap();
        let h = build_pair_hamiltonian(&o, &TwoBodyTensor::zeros(3)).unwrap();
        assert_eq!(h.matrix().max_abs(), 0.0);
    }

    #[test]
    fn rejects_broken_tensor_symmetry() {
        let mut data = vec![0.0; 16];
        // T[0,1,0,1] is its own Hermitian partner but lacks the exchange partner T[1,0,1,0].
        data[5] = 1.0;
        match TwoBodyTensor::new(2, data) {
            Err(ModeSpaceError::TensorSymmetry { symmetry, .. }) => assert_eq!(symmetry, "particle-exchange"),
            other => panic!("unexpected {other:?}"),
        }
        let mut data = vec![0.0; 16];
        // T[0,0,1,1] and its exchange partner (same index) without the Hermitian partner.
        data[3] = 1.0;
        match TwoBodyTensor::new(2, data) {
            Err(ModeSpaceError::TensorSymmetry { symmetry, .. }) => assert_eq!(symmetry, "Hermitian"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_site_bound_states() {
        let (o, t) = two_site_site_basis(1.0, -4.0);
        let spec = solve_bound_states(&build_pair_hamiltonian(&o, &t).unwrap(), &o, BoundPolicy::default()).unwrap();
        assert!((spec.continuum_edge() + 2.0).abs() < 1e-14);
        // Both the symmetric (-2 - 2 sqrt 2) and the site-antisymmetric (-4) pair states lie below -2.
        assert_eq!(spec.len(), 2);
        assert!((spec.energy(0) + 2.0 + 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((spec.energy(1) + 4.0).abs() < 1e-12);
        // Ground state symmetric under site exchange.
        let c = |p, q| spec.pair_overlap(0, p, q).unwrap();
        assert!((c(0, 0) - c(1, 1)).abs() < 1e-14);
        assert_eq!(c(0, 1), c(1, 0));
    }

    #[test]
    fn two_site_ground_coefficients_are_locked() {
        let (o, t) = two_site_site_basis(1.0, -4.0);
        let spec = solve_bound_states(&build_pair_hamiltonian(&o, &t).unwrap(), &o, BoundPolicy::LowestK(1)).unwrap();
        let a = spec.coefficient(0, 0, 0);
        let b = spec.coefficient(0, 0, 1);
        // Symmetric sector {(|00>+|11>)/sqrt2, |{0,1}>} gives [[-4,-2],[-2,0]] with
        // ground vector (1, sqrt2 - 1) up to normalization.
        let r = 2f64.sqrt() - 1.0;
        let nrm = (1.0 + r * r).sqrt();
        assert!((a - 1.0 / nrm / 2f64.sqrt()).abs() < 1e-12);
        assert!((b - r / nrm / 2f64.sqrt()).abs() < 1e-12);
        let total: f64 = spec.coefficients(0).iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strong_coupling_closed_form() {
        let (tt, u) = (1.0, -40.0);
        let (o, t) = two_site_site_basis(tt, u);
        let spec = solve_bound_states(&build_pair_hamiltonian(&o, &t).unwrap(), &o, BoundPolicy::default()).unwrap();
        let exact = (u - (u * u + 16.0 * tt * tt).sqrt()) / 2.0;
        assert!((spec.energy(0) - exact).abs() < 1e-9);
    }

    #[test]
    fn no_interaction_no_binding() {
        for t in [0.5, 1.0, 3.0] {
            let (o, tt) = two_site_site_basis(t, 0.0);
            let spec =
                solve_bound_states(&build_pair_hamiltonian(&o, &tt).unwrap(), &o, BoundPolicy::default()).unwrap();
            assert!(spec.is_empty());
            assert!((spec.continuum_edge() + 2.0 * t).abs() < 1e-14);
        }
    }

    #[test]
    fn single_pair_overlap_convention() {
        // A diagonal pair operator whose ground state is exactly |{0,1}>.
        let o = OneBodyTensor::new(DenseMatrix::identity(2)).unwrap();
        let h = PairHamiltonian::custom(2, DenseMatrix::from_diagonal(&[1.0, -3.0, 2.0])).unwrap();
        let spec = solve_bound_states(&h, &o, BoundPolicy::LowestK(1)).unwrap();
        let c = spec.pair_overlap(0, 0, 1).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(spec.pair_overlap(0, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn lowest_k_bounds_and_ranges() {
        let (o, t) = two_site_site_basis(1.0, -4.0);
        let h = build_pair_hamiltonian(&o, &t).unwrap();
        assert!(matches!(
            solve_bound_states(&h, &o, BoundPolicy::LowestK(4)),
            Err(ModeSpaceError::TooManyBoundStates {
                requested: 4,
                dimension: 3
            })
        ));
        let spec = solve_bound_states(&h, &o, BoundPolicy::LowestK(3)).unwrap();
        assert_eq!(spec.len(), 3);
        assert!(spec.pair_overlap(3, 0, 0).is_err());
        assert!(spec.pair_overlap(0, 2, 0).is_err());
        for a in 0..3 {
            for b in 0..3 {
                let s: f64 = (0..2)
                    .flat_map(|p| (0..2).map(move |q| (p, q)))
                    .map(|(p, q)| spec.pair_overlap(a, p, q).unwrap() * spec.pair_overlap(b, p, q).unwrap())
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((s - target).abs() < 1e-10);
            }
        }
    }
}
