//! Occupation-number states of the idealized Fock space, fixed-constituent
//! sectors, and bosonic ladder operators acting on them.

use std::collections::HashMap;
use std::fmt;

use crate::numerics::{SparseBuilder, SparseMatrix};

/// Largest total constituent number an occupation state may carry.
pub const MAX_CONSTITUENTS: usize = 64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum FockError {
    #[error("constituent number {0} exceeds the supported maximum of {MAX_CONSTITUENTS}")]
    TooManyConstituents(usize),
}

/// A single bosonic mode: unbound (atom) mode `m` or composite (molecule) mode `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Atom(usize),
    Molecule(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Occupations `{n_m}` of the unbound modes and `{n_alpha}` of the composite modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    atoms: Vec<u8>,
    molecules: Vec<u8>,
}

impl OccupationState {
    pub fn new(atoms: Vec<u8>, molecules: Vec<u8>) -> Result<Self, FockError> {
        let n: usize =
            atoms.iter().map(|&c| c as usize).sum::<usize>() + 2 * molecules.iter().map(|&c| c as usize).sum::<usize>();
        if n > MAX_CONSTITUENTS {
            return Err(FockError::TooManyConstituents(n));
        }
        Ok(Self { atoms, molecules })
    }

    pub fn vacuum(mode_count: usize, composite_count: usize) -> Self {
        Self {
            atoms: vec![0; mode_count],
            molecules: vec![0; composite_count],
        }
    }

    pub fn atoms(&self) -> &[u8] {
        &self.atoms
    }

    pub fn molecules(&self) -> &[u8] {
        &self.molecules
    }

    pub fn mode_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn composite_count(&self) -> usize {
        self.molecules.len()
    }

    pub fn occupation(&self, mode: Mode) -> usize {
        match mode {
            Mode::Atom(m) => self.atoms[m] as usize,
            Mode::Molecule(a) => self.molecules[a] as usize,
        }
    }

    /// `N_A`, the number of unbound constituents.
    pub fn atom_count(&self) -> usize {
        self.atoms.iter().map(|&c| c as usize).sum()
    }

    /// `N_M`, the number of composites.
    pub fn molecule_count(&self) -> usize {
        self.molecules.iter().map(|&c| c as usize).sum()
    }

    /// `N = N_A + 2 N_M`.
    pub fn constituent_number(&self) -> usize {
        self.atom_count() + 2 * self.molecule_count()
    }

    /// `1 / sqrt(N! 2^{N_M} prod_m n_m! prod_alpha n_alpha!)`.
    pub fn normalization_constant(&self) -> f64 {
        let mut denom = factorial(self.constituent_number()) * 2f64.powi(self.molecule_count() as i32);
        for &c in self.atoms.iter().chain(&self.molecules) {
            denom *= factorial(c as usize);
        }
        1.0 / denom.sqrt()
    }

    /// Applies one creation or annihilation operator, returning the ladder
    /// coefficient and the resulting state, or `(0, None)` when annihilating
    /// an empty mode.
    pub fn apply_ladder(&self, mode: Mode, ladder: Ladder) -> (f64, Option<OccupationState>) {
        let n = self.occupation(mode);
        match ladder {
            Ladder::Annihilate if n == 0 => (0.0, None),
            Ladder::Annihilate => {
                let mut next = self.clone();
                *next.slot_mut(mode) -= 1;
                ((n as f64).sqrt(), Some(next))
            }
            Ladder::Create => {
                let added = match mode {
                    Mode::Atom(_) => 1,
                    Mode::Molecule(_) => 2,
                };
                assert!(
                    self.constituent_number() + added <= MAX_CONSTITUENTS,
                    "creation on {self} exceeds {MAX_CONSTITUENTS} constituents"
                );
                let mut next = self.clone();
                *next.slot_mut(mode) += 1;
                (((n + 1) as f64).sqrt(), Some(next))
            }
        }
    }

    /// Applies an operator string written left to right, e.g.
    /// `[(a, Create), (b, Annihilate)]` for `a^dag_a a_b`; the rightmost
    /// operator acts first. Returns `None` if any step annihilates the state.
    pub fn apply_string(&self, ops: &[(Mode, Ladder)]) -> Option<(f64, OccupationState)> {
        let mut coeff = 1.0;
        let mut state = self.clone();
        for &(mode, ladder) in ops.iter().rev() {
            let (c, next) = state.apply_ladder(mode, ladder);
            coeff *= c;
            state = next?;
        }
        Some((coeff, state))
    }

    fn slot_mut(&mut self, mode: Mode) -> &mut u8 {
        match mode {
            Mode::Atom(m) => &mut self.atoms[m],
            Mode::Molecule(a) => &mut self.molecules[a],
        }
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u8]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "|{} ; {}⟩", join(&self.atoms), join(&self.molecules))
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Number of ways to place `n` indistinguishable items in `k` boxes.
pub fn multiset_count(k: usize, n: usize) -> u128 {
    if k == 0 {
        return u128::from(n == 0);
    }
    binomial((n + k - 1) as u128, n as u128)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form size of the sector with `n` constituents.
pub fn sector_size(n: usize, mode_count: usize, composite_count: usize) -> u128 {
    (0..=n / 2)
        .map(|nm| multiset_count(mode_count, n - 2 * nm) * multiset_count(composite_count, nm))
        .sum()
}

/// An ordered list of occupation states with a reverse index.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    mode_count: usize,
    composite_count: usize,
    states: Vec<OccupationState>,
    index: HashMap<OccupationState, usize>,
}

/// Every occupation vector with `sum n_m + 2 sum n_alpha = n`, in descending
/// lexicographic order of `(n_1..n_M, n_1..n_A)`.
pub fn enumerate_sector(n: usize, mode_count: usize, composite_count: usize) -> Result<SectorBasis, FockError> {
    if n > MAX_CONSTITUENTS {
        return Err(FockError::TooManyConstituents(n));
    }
    let weights: Vec<usize> = std::iter::repeat_n(1, mode_count)
        .chain(std::iter::repeat_n(2, composite_count))
        .collect();
    let mut counts = vec![0u8; weights.len()];
    let mut states = Vec::new();
    fill(&weights, 0, n, &mut counts, &mut |c: &[u8]| {
        states.push(OccupationState {
            atoms: c[..mode_count].to_vec(),
            molecules: c[mode_count..].to_vec(),
        });
    });
    Ok(SectorBasis::from_states(mode_count, composite_count, states))
}

fn fill(weights: &[usize], slot: usize, remaining: usize, counts: &mut [u8], emit: &mut impl FnMut(&[u8])) {
    if slot == weights.len() {
        if remaining == 0 {
            emit(counts);
        }
        return;
    }
    let w = weights[slot];
    for c in (0..=remaining / w).rev() {
        counts[slot] = c as u8;
        fill(weights, slot + 1, remaining - c * w, counts, emit);
    }
    counts[slot] = 0;
}

impl SectorBasis {
    fn from_states(mode_count: usize, composite_count: usize, states: Vec<OccupationState>) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self {
            mode_count,
            composite_count,
            states,
            index,
        }
    }

    /// States of `self` followed by those of `other` (duplicates dropped).
    pub fn union(&self, other: &SectorBasis) -> SectorBasis {
        assert_eq!(
            (self.mode_count, self.composite_count),
            (other.mode_count, other.composite_count),
            "cannot merge bases over different mode sets"
        );
        let mut states = self.states.clone();
        states.extend(other.states.iter().filter(|s| !self.index.contains_key(*s)).cloned());
        Self::from_states(self.mode_count, self.composite_count, states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &OccupationState {
        &self.states[i]
    }

    pub fn index_of(&self, s: &OccupationState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn composite_count(&self) -> usize {
        self.composite_count
    }

    /// Distinct constituent numbers present, ascending.
    pub fn constituent_numbers(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.states.iter().map(|s| s.constituent_number()).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// The single constituent number of a sector, or `None` for mixed bases.
    pub fn constituent_number(&self) -> Option<usize> {
        match self.constituent_numbers().as_slice() {
            [n] => Some(*n),
            [] => Some(0),
            _ => None,
        }
    }
}

/// Product space with every mode occupation capped at `cap`, used to check
/// the ladder algebra on finite matrices.
#[derive(Debug, Clone)]
pub struct TruncatedFockSpace {
    cap: u8,
    basis: SectorBasis,
}

impl TruncatedFockSpace {
    pub fn new(mode_count: usize, composite_count: usize, cap: u8) -> Self {
        let slots = mode_count + composite_count;
        let mut states = Vec::new();
        let mut counts = vec![0u8; slots];
        loop {
            states.push(OccupationState {
                atoms: counts[..mode_count].to_vec(),
                molecules: counts[mode_count..].to_vec(),
            });
            let mut k = slots;
            loop {
                if k == 0 {
                    return Self {
                        cap,
                        basis: SectorBasis::from_states(mode_count, composite_count, states),
                    };
                }
                k -= 1;
                if counts[k] < cap {
                    counts[k] += 1;
                    break;
                }
                counts[k] = 0;
            }
        }
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    /// Matrix of a single ladder operator; transitions leaving the space are dropped.
    pub fn ladder_matrix(&self, mode: Mode, ladder: Ladder) -> SparseMatrix {
        let mut b = SparseBuilder::new(self.basis.len());
        for (col, s) in self.basis.states().iter().enumerate() {
            if let (c, Some(next)) = s.apply_ladder(mode, ladder) {
                if let Some(row) = self.basis.index_of(&next) {
                    b.push(row, col, c);
                }
            }
        }
        b.finalize_with_tolerance(0.0)
    }

    /// `a b - b a`.
    pub fn commutator(&self, a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
        a.matmul(b).sub(&b.matmul(a))
    }

    /// Whether every occupation of state `i` is strictly below the cap.
    pub fn is_interior(&self, i: usize) -> bool {
        let s = self.basis.state(i);
        s.atoms().iter().chain(s.molecules()).all(|&c| c < self.cap)
    }
}
