//! Ladder-free reference evaluation of the Hamiltonian terms.
//!
//! Occupation states are expanded into symmetrized sums of labeled products
//! over all particle permutations. The projected first-quantized terms act
//! on those sums directly: for every cluster of labels matching a term's
//! right-hand projector, the cluster is replaced by every left-hand projector
//! state weighted by the exact cluster matrix element. Matrix elements then
//! follow from idealized overlaps. Nothing here uses ladder operators or the
//! coefficient tables of [`crate::hamiltonian`].
//!
//! Summation regions:
//!
//! * `SS`: every unbound label `i`.
//! * `SSSS`, `CSS`: every unordered pair of unbound labels.
//! * `CC`, `SSC`: every composite factor.
//! * `SCSC`: every (unbound label `i`, composite `{j,k}`) pair. The direct part
//!   keeps the grouping; the exchange part regroups to `S(j) C(i,k)` and
//!   `S(k) C(i,j)`.
//! * `CCCC`: every unordered pair of composites `{i,j}`, `{k,l}`. The direct
//!   part keeps the grouping; the exchange part regroups to the two other
//!   pairings `C(i,k) C(j,l)` and `C(i,l) C(j,k)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::fock::{enumerate_sector, FockError, OccupationState, SectorBasis};
use crate::formal::{
    canonicalize, labeled_matrix_element, FormalError, FormalFactor, FormalProduct, Label, Operator, OperatorTerm,
};
use crate::hamiltonian::{HamiltonianError, TermBuilder, TermId};
use crate::mode_space::{CompositeSpectrum, ModeSpace};

/// Largest constituent number the permutation expansion accepts.
pub const MAX_ORACLE_CONSTITUENTS: usize = 6;

/// Tolerance on `|sq - oracle|` for a verification run to pass.
pub const VERIFICATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error("permutation expansion of {n} constituents needs {permutations} terms per state; limit is N <= {MAX_ORACLE_CONSTITUENTS}")]
    TooLarge { n: usize, permutations: u64 },
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// The projected first-quantized terms carry the same seven labels as the
/// second-quantized ones.
pub type ProjectedTermId = TermId;

/// A linear combination of canonical labeled products, like terms merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FormalState {
    terms: BTreeMap<Vec<FormalFactor>, f64>,
}

impl FormalState {
    pub fn new() -> Self {
        Self::default()
    }

    fn add(&mut self, factors: Vec<FormalFactor>, weight: f64) {
        *self.terms.entry(factors).or_insert(0.0) += weight;
    }

    pub fn add_product(&mut self, p: &FormalProduct) {
        self.add(p.factors().to_vec(), p.weight());
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn products(&self) -> impl Iterator<Item = FormalProduct> + '_ {
        self.terms
            .iter()
            .map(|(f, &w)| FormalProduct::new(w, f.clone()).expect("stored products are canonical"))
    }

    pub fn weight_of(&self, factors: &[FormalFactor]) -> f64 {
        self.terms.get(factors).copied().unwrap_or(0.0)
    }

    /// Idealized overlap, summed over matching products.
    pub fn inner(&self, other: &FormalState) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .terms
            .iter()
            .filter_map(|(f, w)| large.terms.get(f).map(|v| w * v))
            .fold(0.0, |acc, x| acc + x)
    }

    fn scale_add(&mut self, other: &FormalState, factor: f64) {
        for (f, w) in &other.terms {
            self.add(f.clone(), w * factor);
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<Label>> {
    fn go(prefix: &mut Vec<Label>, rest: &mut Vec<Label>, out: &mut Vec<Vec<Label>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let l = rest.remove(i);
            prefix.push(l);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, l);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (1..=n as Label).collect(), &mut out);
    out
}

/// `L({n}) sum_P` of the reference product over all label permutations.
pub fn expand_basis_state(s: &OccupationState) -> Result<FormalState, OracleError> {
    let n = s.constituent_number();
    if n > MAX_ORACLE_CONSTITUENTS {
        let permutations = (1..=n as u64).product();
        return Err(OracleError::TooLarge { n, permutations });
    }
    let mut reference = Vec::new();
    let mut next: Label = 1;
    for (m, &c) in s.atoms().iter().enumerate() {
        for _ in 0..c {
            reference.push(FormalFactor::atom(m, next));
            next += 1;
        }
    }
    for (a, &c) in s.molecules().iter().enumerate() {
        for _ in 0..c {
            reference.push(FormalFactor::pair(a, next, next + 1));
            next += 2;
        }
    }
    let weight = s.normalization_constant();
    let mut state = FormalState::new();
    for perm in permutations(n) {
        let relabeled = reference.iter().map(|f| f.relabel(|l| perm[l as usize - 1])).collect();
        state.add(canonicalize(relabeled)?, weight);
    }
    Ok(state)
}

type ElementKey = (Vec<FormalFactor>, Operator, Vec<FormalFactor>);

/// Evaluates projected terms on formal states for one model.
pub struct Oracle<'a> {
    modes: &'a ModeSpace,
    spectrum: &'a CompositeSpectrum,
    cache: Mutex<HashMap<ElementKey, f64>>,
}

struct Split {
    atoms: Vec<(Label, usize)>,
    pairs: Vec<((Label, Label), usize)>,
}

fn split(factors: &[FormalFactor]) -> Split {
    let mut atoms = Vec::new();
    let mut pairs = Vec::new();
    for f in factors {
        match *f {
            FormalFactor::Atom { mode, label } => atoms.push((label, mode)),
            FormalFactor::Pair { composite, labels } => pairs.push((labels, composite)),
        }
    }
    Split { atoms, pairs }
}

fn factor_labels(f: &FormalFactor) -> Vec<Label> {
    match *f {
        FormalFactor::Atom { label, .. } => vec![label],
        FormalFactor::Pair { labels, .. } => vec![labels.0, labels.1],
    }
}

impl<'a> Oracle<'a> {
    pub fn new(modes: &'a ModeSpace, spectrum: &'a CompositeSpectrum) -> Self {
        Self {
            modes,
            spectrum,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Cluster matrix element, memoized on an order-preserving relabeling to `1..k`.
    fn element(&self, bra: &[FormalFactor], op: &Operator, ket: &[FormalFactor]) -> Result<f64, OracleError> {
        let mut labels: Vec<Label> = ket.iter().flat_map(factor_labels).collect();
        labels.sort_unstable();
        let map = |l: Label| labels.binary_search(&l).expect("cluster label") as Label + 1;
        let bra_c = canonicalize(bra.iter().map(|f| f.relabel(map)).collect())?;
        let ket_c = canonicalize(ket.iter().map(|f| f.relabel(map)).collect())?;
        let op_c = Operator::new(
            op.terms()
                .iter()
                .map(|t| match *t {
                    OperatorTerm::One(i) => OperatorTerm::One(map(i)),
                    OperatorTerm::Two(i, j) => OperatorTerm::Two(map(i), map(j)),
                })
                .collect(),
        );
        let key = (bra_c, op_c, ket_c);
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = labeled_matrix_element(
            &FormalProduct::new(1.0, key.0.clone())?,
            &key.1,
            &FormalProduct::new(1.0, key.2.clone())?,
            self.modes,
            self.spectrum,
        )?;
        self.cache.lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    /// Replaces the factors at `removed` positions of `factors` by `cluster_ket`
    /// projected onto every `candidates` bra, accumulating into `out`.
    fn project(
        &self,
        out: &mut FormalState,
        weight: f64,
        factors: &[FormalFactor],
        removed: &[usize],
        op: &Operator,
        candidates: &[Vec<FormalFactor>],
    ) -> Result<(), OracleError> {
        let cluster_ket: Vec<FormalFactor> = removed.iter().map(|&k| factors[k]).collect();
        let spectators: Vec<FormalFactor> = factors
            .iter()
            .enumerate()
            .filter(|(k, _)| !removed.contains(k))
            .map(|(_, f)| *f)
            .collect();
        for bra in candidates {
            let v = self.element(bra, op, &cluster_ket)?;
            if v == 0.0 {
                continue;
            }
            let mut next = spectators.clone();
            next.extend_from_slice(bra);
            out.add(canonicalize(next)?, weight * v);
        }
        Ok(())
    }

    fn atoms_on(&self, labels: &[Label]) -> Vec<Vec<FormalFactor>> {
        let m = self.modes.mode_count();
        let mut out = vec![Vec::new()];
        for &l in labels {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..m).map(move |mode| {
                        let mut v = prefix.clone();
                        v.push(FormalFactor::atom(mode, l));
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn atom_and_pair(&self, atom: Label, pair: (Label, Label)) -> Vec<Vec<FormalFactor>> {
        let mut out = Vec::new();
        for m in 0..self.modes.mode_count() {
            for a in 0..self.spectrum.len() {
                out.push(vec![FormalFactor::atom(m, atom), FormalFactor::pair(a, pair.0, pair.1)]);
            }
        }
        out
    }

    fn pairs_on(&self, groups: &[(Label, Label)]) -> Vec<Vec<FormalFactor>> {
        let mut out = vec![Vec::new()];
        for &(i, j) in groups {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..self.spectrum.len()).map(move |a| {
                        let mut v = prefix.clone();
                        v.push(FormalFactor::pair(a, i, j));
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Applies one projected term to a formal state.
    pub fn apply_projected_term(&self, term: ProjectedTermId, fs: &FormalState) -> Result<FormalState, OracleError> {
        let mut out = FormalState::new();
        for (factors, &w) in &fs.terms {
            let s = split(factors);
            let pos = |f: &FormalFactor| factors.iter().position(|g| g == f).expect("factor present");
            let atom_pos = |k: usize| pos(&FormalFactor::atom(s.atoms[k].1, s.atoms[k].0));
            let pair_pos = |k: usize| {
                let ((i, j), a) = s.pairs[k];
                pos(&FormalFactor::pair(a, i, j))
            };
            match term {
                TermId::SS => {
                    for k in 0..s.atoms.len() {
                        let i = s.atoms[k].0;
                        let op = Operator::new(vec![OperatorTerm::One(i)]);
                        self.project(&mut out, w, factors, &[atom_pos(k)], &op, &self.atoms_on(&[i]))?;
                    }
                }
                TermId::SSSS | TermId::CSS => {
                    for a in 0..s.atoms.len() {
                        for b in (a + 1)..s.atoms.len() {
                            let (i, j) = (s.atoms[a].0, s.atoms[b].0);
                            let (op, candidates) = if term == TermId::SSSS {
                                (Operator::new(vec![OperatorTerm::Two(i, j)]), self.atoms_on(&[i, j]))
                            } else {
                                (
                                    Operator::cluster_hamiltonian(&[i, j]),
                                    self.pairs_on(&[(i.min(j), i.max(j))]),
                                )
                            };
                            self.project(&mut out, w, factors, &[atom_pos(a), atom_pos(b)], &op, &candidates)?;
                        }
                    }
                }
                TermId::CC | TermId::SSC => {
                    for k in 0..s.pairs.len() {
                        let (i, j) = s.pairs[k].0;
                        let op = Operator::cluster_hamiltonian(&[i, j]);
                        let candidates = if term == TermId::CC {
                            self.pairs_on(&[(i, j)])
                        } else {
                            self.atoms_on(&[i, j])
                        };
                        self.project(&mut out, w, factors, &[pair_pos(k)], &op, &candidates)?;
                    }
                }
                TermId::SCSC => {
                    for a in 0..s.atoms.len() {
                        for b in 0..s.pairs.len() {
                            let i = s.atoms[a].0;
                            let (j, k) = s.pairs[b].0;
                            let removed = [atom_pos(a), pair_pos(b)];
                            let direct = Operator::interaction_between(&[i], &[j, k]);
                            self.project(&mut out, w, factors, &removed, &direct, &self.atom_and_pair(i, (j, k)))?;
                            let full = Operator::cluster_hamiltonian(&[i, j, k]);
                            self.project(&mut out, w, factors, &removed, &full, &self.atom_and_pair(j, (i, k)))?;
                            self.project(&mut out, w, factors, &removed, &full, &self.atom_and_pair(k, (i, j)))?;
                        }
                    }
                }
                TermId::CCCC => {
                    for a in 0..s.pairs.len() {
                        for b in (a + 1)..s.pairs.len() {
                            let (i, j) = s.pairs[a].0;
                            let (k, l) = s.pairs[b].0;
                            let removed = [pair_pos(a), pair_pos(b)];
                            let direct = Operator::interaction_between(&[i, j], &[k, l]);
                            self.project(
                                &mut out,
                                w,
                                factors,
                                &removed,
                                &direct,
                                &self.pairs_on(&[(i, j), (k, l)]),
                            )?;
                            let full = Operator::cluster_hamiltonian(&[i, j, k, l]);
                            let p1 = [(i.min(k), i.max(k)), (j.min(l), j.max(l))];
                            let p2 = [(i.min(l), i.max(l)), (j.min(k), j.max(k))];
                            self.project(&mut out, w, factors, &removed, &full, &self.pairs_on(&p1))?;
                            self.project(&mut out, w, factors, &removed, &full, &self.pairs_on(&p2))?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sum of all seven projected terms.
    pub fn apply_all_terms(&self, fs: &FormalState) -> Result<FormalState, OracleError> {
        let mut out = FormalState::new();
        for t in TermId::ALL {
            out.scale_add(&self.apply_projected_term(t, fs)?, 1.0);
        }
        Ok(out)
    }

    /// `<bra| term |ket>` through permutation expansion.
    pub fn matrix_element(
        &self,
        term: ProjectedTermId,
        bra: &OccupationState,
        ket: &OccupationState,
    ) -> Result<f64, OracleError> {
        if bra.constituent_number() != ket.constituent_number() {
            return Ok(0.0);
        }
        let k = self.apply_projected_term(term, &expand_basis_state(ket)?)?;
        Ok(expand_basis_state(bra)?.inner(&k))
    }
}

pub fn apply_projected_term(
    term: ProjectedTermId,
    fs: &FormalState,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
) -> Result<FormalState, OracleError> {
    Oracle::new(modes, spectrum).apply_projected_term(term, fs)
}

pub fn oracle_matrix_element(
    term: ProjectedTermId,
    bra: &OccupationState,
    ket: &OccupationState,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
) -> Result<f64, OracleError> {
    Oracle::new(modes, spectrum).matrix_element(term, bra, ket)
}

/// One compared matrix element.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationEntry {
    pub term: String,
    pub sector: usize,
    pub bra: String,
    pub ket: String,
    pub sq_value: f64,
    pub oracle_value: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationSummary {
    pub max_abs_diff: f64,
    pub pairs_checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Entries are listed when either value is nonzero; `pairs_checked` counts
/// every (term, bra, ket) triple compared.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<VerificationEntry>,
    pub summary: VerificationSummary,
    pub summation_regions: Vec<String>,
}

/// Compares every term on every basis pair in sectors `0..=max_n`.
pub fn verify_sectors(
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
    max_n: usize,
) -> Result<VerificationReport, OracleError> {
    if max_n > MAX_ORACLE_CONSTITUENTS {
        let permutations = (1..=max_n as u64).product();
        return Err(OracleError::TooLarge { n: max_n, permutations });
    }
    let oracle = Oracle::new(modes, spectrum);
    let mut builder = TermBuilder::new(modes, spectrum)?;
    let mut entries = Vec::new();
    let mut pairs_checked = 0;
    let mut max_abs_diff = 0.0_f64;
    for n in 0..=max_n {
        let basis = enumerate_sector(n, modes.mode_count(), spectrum.len())?;
        let expanded: Vec<FormalState> = basis
            .states()
            .par_iter()
            .map(expand_basis_state)
            .collect::<Result<_, _>>()?;
        for term in TermId::ALL {
            let sq = builder.build(term, &basis)?;
            let columns = oracle_columns(&oracle, term, &basis, &expanded)?;
            for (col, column) in columns.iter().enumerate() {
                for (row, &oracle_value) in column.iter().enumerate() {
                    let sq_value = sq.get(row, col);
                    let abs_diff = (sq_value - oracle_value).abs();
                    max_abs_diff = max_abs_diff.max(abs_diff);
                    pairs_checked += 1;
                    if sq_value != 0.0 || oracle_value != 0.0 {
                        entries.push(VerificationEntry {
                            term: term.to_string(),
                            sector: n,
                            bra: basis.state(row).to_string(),
                            ket: basis.state(col).to_string(),
                            sq_value,
                            oracle_value,
                            abs_diff,
                        });
                    }
                }
            }
        }
    }
    Ok(VerificationReport {
        entries,
        summary: VerificationSummary {
            max_abs_diff,
            pairs_checked,
            tolerance: VERIFICATION_TOLERANCE,
            passed: max_abs_diff <= VERIFICATION_TOLERANCE,
        },
        summation_regions: summation_regions(),
    })
}

/// Oracle matrix of one term, column-major (`[ket][bra]`).
pub fn oracle_columns(
    oracle: &Oracle<'_>,
    term: TermId,
    basis: &SectorBasis,
    expanded: &[FormalState],
) -> Result<Vec<Vec<f64>>, OracleError> {
    expanded
        .par_iter()
        .map(|ket| {
            let applied = oracle.apply_projected_term(term, ket)?;
            Ok((0..basis.len()).map(|row| expanded[row].inner(&applied)).collect())
        })
        .collect()
}

fn summation_regions() -> Vec<String> {
    [
        "SS: every unbound label",
        "SSSS, CSS: every unordered pair of unbound labels",
        "CC, SSC: every composite",
        "SCSC: every (unbound label i, composite {j,k}); direct keeps grouping, exchange regroups to S(j)C(i,k) and S(k)C(i,j)",
        "CCCC: every unordered pair of composites {i,j},{k,l}; direct keeps grouping, exchange regroups to C(i,k)C(j,l) and C(i,l)C(j,k)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}
