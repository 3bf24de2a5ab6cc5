//! Second-quantized Hamiltonian with unbound and composite modes.
//!
//! Each of the seven terms is a normal-ordered ladder string with a
//! coefficient table. Every table entry is a labeled bra-ket evaluated by
//! [`labeled_matrix_element`](crate::formal::labeled_matrix_element)-style
//! exact contraction, with the particle labels written exactly as in the
//! term's defining bra-ket:
//!
//! | term | string | prefactor | bra-ket(s) |
//! |------|--------|-----------|------------|
//! | SS   | `a†_n a_m` | 1 | `<ψn(1)|O(1)|ψm(1)>` |
//! | SSSS | `a†_m a†_n a_p a_q` | 1/2 | `<ψm(1)ψn(2)|T(1,2)|ψp(2)ψq(1)>` |
//! | CC   | `a†_α a_β` | 1 | `<φα(1,2)|H(1,2)|φβ(1,2)>` |
//! | CSS  | `a†_α a_m a_n` | 1/√2 | `<φα(1,2)|H(1,2)|ψm(2)ψn(1)>` |
//! | SSC  | `a†_m a†_n a_α` | 1/√2 | `<ψm(1)ψn(2)|H(1,2)|φα(1,2)>` |
//! | SCSC | `a†_m a†_α a_β a_n` | 1 | direct `T(1,2)+T(1,3)` on `|φβ(2,3)ψn(1)>`, exchange `H(1,2,3)` on `|φβ(1,3)ψn(2)>` and `|φβ(1,2)ψn(3)>` |
//! | CCCC | `a†_α a†_β a_τ a_θ` | 1/2 | direct inter-pair `T` on `|φθ(3,4)φτ(1,2)>`, exchange `H(1..4)` on `|φθ(2,4)φτ(1,3)>` and `|φθ(2,3)φτ(1,4)>` |
//!
//! `H(...)` is the full cluster Hamiltonian `sum O + sum_{i<j} T`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::fock::{Ladder, Mode, OccupationState, SectorBasis};
use crate::formal::{ExpandedProduct, FormalError, FormalFactor, FormalProduct, Label, Operator, OperatorTerm};
use crate::mode_space::{CompositeSpectrum, ModeSpace};
use crate::numerics::{SparseBuilder, SparseMatrix};

#[derive(Debug, Clone, thiserror::Error)]
pub enum HamiltonianError {
    #[error("inconsistent inputs: {0}")]
    Mismatch(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("term {term} maps {from} to {to}, which is outside the basis")]
    NotClosed { term: TermId, from: String, to: String },
    #[error(transparent)]
    Formal(#[from] FormalError),
}

/// The seven terms of the projected Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermId {
    SS,
    SSSS,
    CC,
    CSS,
    SSC,
    SCSC,
    CCCC,
}

impl TermId {
    pub const ALL: [TermId; 7] = [
        TermId::SS,
        TermId::SSSS,
        TermId::CC,
        TermId::CSS,
        TermId::SSC,
        TermId::SCSC,
        TermId::CCCC,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TermId::SS => "SS",
            TermId::SSSS => "SSSS",
            TermId::CC => "CC",
            TermId::CSS => "CSS",
            TermId::SSC => "SSC",
            TermId::SCSC => "SCSC",
            TermId::CCCC => "CCCC",
        }
    }

    /// Ladder species of the string, creators then annihilators, left to right.
    fn shape(&self) -> (&'static [Species], &'static [Species], f64) {
        use Species::{Atom as S, Molecule as C};
        let half = 0.5;
        let root_half = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            TermId::SS => (&[S], &[S], 1.0),
            TermId::SSSS => (&[S, S], &[S, S], half),
            TermId::CC => (&[C], &[C], 1.0),
            TermId::CSS => (&[C], &[S, S], root_half),
            TermId::SSC => (&[S, S], &[C], root_half),
            TermId::SCSC => (&[S, C], &[C, S], 1.0),
            TermId::CCCC => (&[C, C], &[C, C], half),
        }
    }

    /// Unbound and composite constituents a state needs for the term to act.
    fn annihilated(&self) -> (usize, usize) {
        let (_, ann, _) = self.shape();
        let atoms = ann.iter().filter(|s| **s == Species::Atom).count();
        (atoms, ann.len() - atoms)
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TermId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TermId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown term `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Species {
    Atom,
    Molecule,
}

impl Species {
    fn mode(self, i: usize) -> Mode {
        match self {
            Species::Atom => Mode::Atom(i),
            Species::Molecule => Mode::Molecule(i),
        }
    }
}

/// Coefficient table of one term, indexed by the string's mode indices in
/// left-to-right order.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat(idx)]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }
}

fn atom(m: usize, l: Label) -> FormalFactor {
    FormalFactor::atom(m, l)
}

fn pair(a: usize, i: Label, j: Label) -> FormalFactor {
    FormalFactor::pair(a, i, j)
}

/// A ket written as a product together with the operator that acts on it.
type KetTerm = (Operator, Vec<FormalFactor>);

/// The bra and ket side of one term's defining bra-kets.
fn term_brakets(term: TermId, creators: &[usize], annihilators: &[usize]) -> (Vec<FormalFactor>, Vec<KetTerm>) {
    let h2 = || Operator::cluster_hamiltonian(&[1, 2]);
    let h3 = || Operator::cluster_hamiltonian(&[1, 2, 3]);
    let h4 = || Operator::cluster_hamiltonian(&[1, 2, 3, 4]);
    match term {
        TermId::SS => {
            let (n, m) = (creators[0], annihilators[0]);
            (
                vec![atom(n, 1)],
                vec![(Operator::new(vec![OperatorTerm::One(1)]), vec![atom(m, 1)])],
            )
        }
        TermId::SSSS => {
            let (m, n, p, q) = (creators[0], creators[1], annihilators[0], annihilators[1]);
            (
                vec![atom(m, 1), atom(n, 2)],
                vec![(Operator::interaction_between(&[1], &[2]), vec![atom(p, 2), atom(q, 1)])],
            )
        }
        TermId::CC => {
            let (a, b) = (creators[0], annihilators[0]);
            (vec![pair(a, 1, 2)], vec![(h2(), vec![pair(b, 1, 2)])])
        }
        TermId::CSS => {
            let (a, m, n) = (creators[0], annihilators[0], annihilators[1]);
            (vec![pair(a, 1, 2)], vec![(h2(), vec![atom(m, 2), atom(n, 1)])])
        }
        TermId::SSC => {
            let (m, n, a) = (creators[0], creators[1], annihilators[0]);
            (vec![atom(m, 1), atom(n, 2)], vec![(h2(), vec![pair(a, 1, 2)])])
        }
        TermId::SCSC => {
            let (m, a, b, n) = (creators[0], creators[1], annihilators[0], annihilators[1]);
            (
                vec![atom(m, 1), pair(a, 2, 3)],
                vec![
                    (
                        Operator::interaction_between(&[1], &[2, 3]),
                        vec![pair(b, 2, 3), atom(n, 1)],
                    ),
                    (h3(), vec![pair(b, 1, 3), atom(n, 2)]),
                    (h3(), vec![pair(b, 1, 2), atom(n, 3)]),
                ],
            )
        }
        TermId::CCCC => {
            let (a, b, tau, theta) = (creators[0], creators[1], annihilators[0], annihilators[1]);
            (
                vec![pair(a, 1, 2), pair(b, 3, 4)],
                vec![
                    (
                        Operator::interaction_between(&[1, 2], &[3, 4]),
                        vec![pair(theta, 3, 4), pair(tau, 1, 2)],
                    ),
                    (h4(), vec![pair(theta, 2, 4), pair(tau, 1, 3)]),
                    (h4(), vec![pair(theta, 2, 3), pair(tau, 1, 4)]),
                ],
            )
        }
    }
}

fn index_tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..d).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

/// Computes the coefficient table of `term` from its bra-kets.
pub fn coefficient_table(
    term: TermId,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
) -> Result<CoefficientTable, HamiltonianError> {
    check_spectrum(modes, spectrum)?;
    let (cre, ann, _) = term.shape();
    let range = |s: &Species| match s {
        Species::Atom => modes.mode_count(),
        Species::Molecule => spectrum.len(),
    };
    let cre_dims: Vec<usize> = cre.iter().map(range).collect();
    let ann_dims: Vec<usize> = ann.iter().map(range).collect();
    let cre_tuples = index_tuples(&cre_dims);
    let ann_tuples = index_tuples(&ann_dims);

    let bras: Vec<ExpandedProduct> = cre_tuples
        .iter()
        .map(|c| {
            let (bra, _) = term_brakets(term, c, &vec![0; ann.len()]);
            ExpandedProduct::expand(&FormalProduct::unit(bra)?, spectrum)
        })
        .collect::<Result<_, FormalError>>()?;

    // One column of the table per annihilator tuple: sum_r op_r |ket_r>.
    let columns: Vec<Vec<f64>> = ann_tuples
        .par_iter()
        .map(|a| -> Result<Vec<f64>, FormalError> {
            let (_, kets) = term_brakets(term, &vec![0; cre.len()], a);
            let mut acc_amps: Vec<f64> = Vec::new();
            for (op, factors) in kets {
                let applied = ExpandedProduct::expand(&FormalProduct::unit(factors)?, spectrum)?.apply(&op, modes)?;
                if acc_amps.is_empty() {
                    acc_amps = applied.amplitudes().to_vec();
                } else {
                    acc_amps.iter_mut().zip(applied.amplitudes()).for_each(|(x, y)| *x += y);
                }
            }
            Ok(bras
                .iter()
                .map(|b| b.amplitudes().iter().zip(&acc_amps).map(|(x, y)| x * y).sum())
                .collect())
        })
        .collect::<Result<_, FormalError>>()?;

    let mut dims = cre_dims;
    dims.extend(ann_dims);
    let mut values = vec![0.0; dims.iter().product()];
    let n_ann = ann_tuples.len();
    for (ai, col) in columns.iter().enumerate() {
        for (ci, v) in col.iter().enumerate() {
            values[ci * n_ann + ai] = *v;
        }
    }
    Ok(CoefficientTable { dims, values })
}

fn check_spectrum(modes: &ModeSpace, spectrum: &CompositeSpectrum) -> Result<(), HamiltonianError> {
    if spectrum.mode_count() != modes.mode_count() {
        return Err(HamiltonianError::Mismatch(format!(
            "spectrum built on {} modes, mode space has {}",
            spectrum.mode_count(),
            modes.mode_count()
        )));
    }
    Ok(())
}

fn check_basis(basis: &SectorBasis, modes: &ModeSpace, spectrum: &CompositeSpectrum) -> Result<(), HamiltonianError> {
    check_spectrum(modes, spectrum)?;
    if basis.mode_count() != modes.mode_count() || basis.composite_count() != spectrum.len() {
        return Err(HamiltonianError::Mismatch(format!(
            "basis has {} unbound / {} composite modes, model has {} / {}",
            basis.mode_count(),
            basis.composite_count(),
            modes.mode_count(),
            spectrum.len()
        )));
    }
    Ok(())
}

/// `<psi_m(1) psi_n(2)|T(1,2)|psi_p(2) psi_q(1)>`, i.e. `T4[m,n,q,p]` once the
/// ket is put back in slot order.
pub fn two_body_element(modes: &ModeSpace, m: usize, n: usize, p: usize, q: usize) -> Result<f64, HamiltonianError> {
    let count = modes.mode_count();
    if [m, n, p, q].iter().any(|&i| i >= count) {
        return Err(HamiltonianError::OutOfRange(format!(
            "({m},{n},{p},{q}) with {count} modes"
        )));
    }
    Ok(modes.two_body().get(m, n, q, p))
}

/// Builds terms on bases over one model, caching coefficient tables.
pub struct TermBuilder<'a> {
    modes: &'a ModeSpace,
    spectrum: &'a CompositeSpectrum,
    tables: HashMap<TermId, CoefficientTable>,
}

impl<'a> TermBuilder<'a> {
    pub fn new(modes: &'a ModeSpace, spectrum: &'a CompositeSpectrum) -> Result<Self, HamiltonianError> {
        check_spectrum(modes, spectrum)?;
        Ok(Self {
            modes,
            spectrum,
            tables: HashMap::new(),
        })
    }

    pub fn table(&mut self, term: TermId) -> Result<&CoefficientTable, HamiltonianError> {
        if !self.tables.contains_key(&term) {
            let t = coefficient_table(term, self.modes, self.spectrum)?;
            self.tables.insert(term, t);
        }
        Ok(&self.tables[&term])
    }

    /// Matrix of `term` on `basis`; column `j` is the term applied to state `j`.
    pub fn build(&mut self, term: TermId, basis: &SectorBasis) -> Result<SparseMatrix, HamiltonianError> {
        check_basis(basis, self.modes, self.spectrum)?;
        let (need_atoms, need_mols) = term.annihilated();
        let active = basis
            .states()
            .iter()
            .any(|s| s.atom_count() >= need_atoms && s.molecule_count() >= need_mols);
        if !active || (need_mols > 0 && self.spectrum.is_empty()) {
            return Ok(SparseMatrix::zeros(basis.len()));
        }
        let table = self.table(term)?;
        apply_term(term, table, basis)
    }
}

fn apply_term(term: TermId, table: &CoefficientTable, basis: &SectorBasis) -> Result<SparseMatrix, HamiltonianError> {
    let (cre, ann, prefactor) = term.shape();
    let n_cre = cre.len();
    let cre_tuples = index_tuples(&table.dims[..n_cre]);
    let ann_dims = &table.dims[n_cre..];

    let columns: Vec<Vec<(usize, f64)>> = basis
        .states()
        .par_iter()
        .map(|ket| -> Result<Vec<(usize, f64)>, HamiltonianError> {
            let mut out = Vec::new();
            let mut idx = vec![0usize; n_cre + ann.len()];
            // Annihilators act right to left; enumerate only paths with nonzero ladder weight.
            annihilate(
                ann,
                ann_dims,
                ann.len(),
                ket.clone(),
                1.0,
                &mut idx[n_cre..],
                &mut |partial, coeff, ann_idx| {
                    for c in &cre_tuples {
                        let ops: Vec<(Mode, Ladder)> =
                            cre.iter().zip(c).map(|(s, &i)| (s.mode(i), Ladder::Create)).collect();
                        let Some((lc, bra)) = partial.apply_string(&ops) else {
                            continue;
                        };
                        let mut full = c.clone();
                        full.extend_from_slice(ann_idx);
                        let v = table.get(&full);
                        if v == 0.0 {
                            continue;
                        }
                        let row = basis.index_of(&bra).ok_or_else(|| HamiltonianError::NotClosed {
                            term,
                            from: ket.to_string(),
                            to: bra.to_string(),
                        })?;
                        out.push((row, prefactor * coeff * lc * v));
                    }
                    Ok(())
                },
            )?;
            Ok(out)
        })
        .collect::<Result<_, _>>()?;

    let mut b = SparseBuilder::new(basis.len());
    for (col, entries) in columns.into_iter().enumerate() {
        b.extend(entries.into_iter().map(|(row, v)| (row, col, v)));
    }
    Ok(b.finalize())
}

/// Recursively applies the annihilators `ann[..k]`, rightmost first, calling
/// `emit` with the depleted state, accumulated coefficient and index tuple.
type Emit<'a> = dyn FnMut(&OccupationState, f64, &[usize]) -> Result<(), HamiltonianError> + 'a;

fn annihilate(
    ann: &[Species],
    dims: &[usize],
    k: usize,
    state: OccupationState,
    coeff: f64,
    idx: &mut [usize],
    emit: &mut Emit<'_>,
) -> Result<(), HamiltonianError> {
    if k == 0 {
        return emit(&state, coeff, idx);
    }
    let slot = k - 1;
    for i in 0..dims[slot] {
        let (c, next) = state.apply_ladder(ann[slot].mode(i), Ladder::Annihilate);
        if let Some(next) = next {
            idx[slot] = i;
            annihilate(ann, dims, slot, next, coeff * c, idx, emit)?;
        }
    }
    Ok(())
}

/// Matrix of one term on `basis`.
pub fn build_term(
    term: TermId,
    basis: &SectorBasis,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
) -> Result<SparseMatrix, HamiltonianError> {
    TermBuilder::new(modes, spectrum)?.build(term, basis)
}

/// All seven term blocks on one basis and their sum.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    basis: SectorBasis,
    blocks: Vec<(TermId, SparseMatrix)>,
    total: SparseMatrix,
}

/// Largest asymmetry of an assembled matrix and the entries that exceed the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiticityReport {
    pub max_asymmetry: f64,
    /// `(row, col, H[row][col], H[col][row])` for every pair above
    /// `HERMITICITY_TOLERANCE * max(1, max|H|)`.
    pub offending: Vec<(usize, usize, f64, f64)>,
}

pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

impl SparseHamiltonian {
    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn total(&self) -> &SparseMatrix {
        &self.total
    }

    pub fn blocks(&self) -> &[(TermId, SparseMatrix)] {
        &self.blocks
    }

    pub fn block(&self, term: TermId) -> &SparseMatrix {
        &self
            .blocks
            .iter()
            .find(|(t, _)| *t == term)
            .expect("all terms present")
            .1
    }

    pub fn hermiticity(&self) -> HermiticityReport {
        let m = &self.total;
        let tol = HERMITICITY_TOLERANCE * m.max_abs().max(1.0);
        let mut offending = Vec::new();
        let mut max_asymmetry = 0.0_f64;
        for &(r, c, v) in m.entries() {
            let w = m.get(c, r);
            let d = (v - w).abs();
            max_asymmetry = max_asymmetry.max(d);
            if d > tol && r < c {
                offending.push((r, c, v, w));
            }
        }
        // Entries whose transpose partner is missing show up from the other side.
        for &(r, c, v) in m.entries() {
            if r > c && m.get(c, r) == 0.0 && v.abs() > tol {
                offending.push((c, r, 0.0, v));
            }
        }
        offending.sort_by_key(|e| (e.0, e.1));
        HermiticityReport {
            max_asymmetry,
            offending,
        }
    }
}

/// Builds every term on `basis` and sums them.
pub fn assemble_hamiltonian(
    basis: &SectorBasis,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
) -> Result<SparseHamiltonian, HamiltonianError> {
    TermBuilder::new(modes, spectrum)?.assemble(basis)
}

impl TermBuilder<'_> {
    pub fn assemble(&mut self, basis: &SectorBasis) -> Result<SparseHamiltonian, HamiltonianError> {
        let mut blocks = Vec::with_capacity(TermId::ALL.len());
        for term in TermId::ALL {
            blocks.push((term, self.build(term, basis)?));
        }
        let total = SparseMatrix::sum(basis.len(), blocks.iter().map(|(_, m)| m));
        Ok(SparseHamiltonian {
            basis: basis.clone(),
            blocks,
            total,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_sector;
    use crate::formal::labeled_matrix_element;
    use crate::mode_space::{BoundPolicy, ModeBasis, OneBodyTensor, TwoBodyTensor};
    use crate::numerics::DenseMatrix;

    fn two_site_momentum(u: f64) -> (ModeSpace, CompositeSpectrum) {
        // Momentum basis of the two-site chain: O = diag(-1, 1), contact U in site basis rotated.
        let o = OneBodyTensor::new(DenseMatrix::from_diagonal(&[-1.0, 1.0])).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u_mat = DenseMatrix::from_rows(&[[r, r], [r, -r]]).unwrap();
        let mut site = vec![0.0; 16];
        site[0] = u;
        site[15] = u;
        let t = TwoBodyTensor::new(2, site).unwrap().transform(&u_mat).unwrap();
        let modes = ModeSpace::new(ModeBasis::indexed(2).unwrap(), o, t).unwrap();
        let spec = modes.solve_bound_states(BoundPolicy::default()).unwrap();
        (modes, spec)
    }

    #[test]
    fn ss_on_single_particle_is_one_body_matrix() {
        let (modes, spec) = two_site_momentum(-4.0);
        let basis = enumerate_sector(1, 2, spec.len()).unwrap();
        let m = build_term(TermId::SS, &basis, &modes, &spec).unwrap();
        // Basis order (1,0),(0,1) maps to modes 0, 1.
        assert_eq!(m.to_dense(), DenseMatrix::from_diagonal(&[-1.0, 1.0]));
    }

    #[test]
    fn cc_on_single_molecule_gives_binding_energy() {
        let (modes, spec) = two_site_momentum(-4.0);
        let basis = enumerate_sector(2, 2, spec.len()).unwrap();
        let cc = build_term(TermId::CC, &basis, &modes, &spec).unwrap();
        for a in 0..spec.len() {
            let mut mols = vec![0; spec.len()];
            mols[a] = 1;
            let i = basis
                .index_of(&OccupationState::new(vec![0, 0], mols).unwrap())
                .unwrap();
            assert!((cc.get(i, i) - spec.energy(a)).abs() < 1e-10);
        }
    }

    #[test]
    fn css_element_for_doubly_occupied_mode() {
        let (modes, spec) = two_site_momentum(-4.0);
        let basis = enumerate_sector(2, 2, spec.len()).unwrap();
        let css = build_term(TermId::CSS, &basis, &modes, &spec).unwrap();
        let ket = basis
            .index_of(&OccupationState::new(vec![2, 0], vec![0; spec.len()]).unwrap())
            .unwrap();
        for b in 0..spec.len() {
            let mut mols = vec![0; spec.len()];
            mols[b] = 1;
            let bra = basis
                .index_of(&OccupationState::new(vec![0, 0], mols).unwrap())
                .unwrap();
            let expected = spec.energy(b) * spec.coefficient(b, 0, 0);
            assert!((css.get(bra, ket) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn two_body_element_swaps_ket_slots() {
        let (modes, spec) = two_site_momentum(-4.0);
        let table = coefficient_table(TermId::SSSS, &modes, &spec).unwrap();
        for m in 0..2 {
            for n in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        let v = two_body_element(&modes, m, n, p, q).unwrap();
                        assert_eq!(v, modes.two_body().get(m, n, q, p));
                        assert_eq!(v, two_body_element(&modes, n, m, q, p).unwrap());
                        assert!((table.get(&[m, n, p, q]) - v).abs() < 1e-14);
                    }
                }
            }
        }
        assert!(two_body_element(&modes, 0, 0, 0, 2).is_err());
    }

    #[test]
    fn tables_match_direct_brakets() {
        let (modes, spec) = two_site_momentum(-4.0);
        let table = coefficient_table(TermId::SCSC, &modes, &spec).unwrap();
        let (bra, kets) = term_brakets(TermId::SCSC, &[1, 0], &[1, 0]);
        let bra = FormalProduct::unit(bra).unwrap();
        let direct: f64 = kets
            .iter()
            .map(|(op, k)| {
                labeled_matrix_element(&bra, op, &FormalProduct::unit(k.clone()).unwrap(), &modes, &spec).unwrap()
            })
            .sum();
        assert!((table.get(&[1, 0, 1, 0]) - direct).abs() < 1e-12);
    }

    #[test]
    fn vacuum_and_single_particle_sectors() {
        let (modes, spec) = two_site_momentum(-4.0);
        let vac = assemble_hamiltonian(&enumerate_sector(0, 2, spec.len()).unwrap(), &modes, &spec).unwrap();
        assert_eq!(vac.total().dim(), 1);
        assert_eq!(vac.total().nnz(), 0);
        let one = assemble_hamiltonian(&enumerate_sector(1, 2, spec.len()).unwrap(), &modes, &spec).unwrap();
        assert_eq!(one.total(), one.block(TermId::SS));
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let (modes, spec) = two_site_momentum(-4.0);
        let basis = enumerate_sector(2, 3, spec.len()).unwrap();
        assert!(matches!(
            build_term(TermId::SS, &basis, &modes, &spec),
            Err(HamiltonianError::Mismatch(_))
        ));
    }

    #[test]
    fn term_names_round_trip() {
        for t in TermId::ALL {
            assert_eq!(t.as_str().parse::<TermId>().unwrap(), t);
        }
        assert!("XX".parse::<TermId>().is_err());
    }
}
