//! Labeled-particle product kets built from unbound factors `|psi_m(i)>` and
//! composite factors `|phi_alpha(i,j)>`.
//!
//! Two kinds of arithmetic live here and are kept apart on purpose:
//!
//! * [`formal_inner_product`] applies the idealized rules: factors on the same
//!   labels are orthonormal, and any mismatch in how labels are grouped into
//!   atoms and pairs gives zero.
//! * [`labeled_matrix_element`] is an exact contraction. Every composite factor
//!   is expanded through its pair coefficients into unbound products, and the
//!   operator is contracted against `O` and `T4` without any idealization.

use std::fmt;

use crate::mode_space::{CompositeSpectrum, ModeSpace};

pub type Label = u8;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum FormalError {
    #[error("particle label {0} appears more than once")]
    DuplicateLabel(Label),
    #[error("label sets differ: bra covers {bra:?}, ket covers {ket:?}")]
    LabelMismatch { bra: Vec<Label>, ket: Vec<Label> },
    #[error("operator acts on label {0}, which the states do not carry")]
    OperatorLabel(Label),
    #[error("two-body term T({0},{0}) acts twice on one particle")]
    DegenerateTwoBody(Label),
    #[error("unbound mode {mode} out of range ({count} modes)")]
    ModeOutOfRange { mode: usize, count: usize },
    #[error("composite {composite} out of range ({count} composites)")]
    CompositeOutOfRange { composite: usize, count: usize },
}

/// One factor of a product ket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormalFactor {
    Atom {
        mode: usize,
        label: Label,
    },
    /// Labels are stored sorted; the pair state is symmetric in them.
    Pair {
        composite: usize,
        labels: (Label, Label),
    },
}

impl FormalFactor {
    pub fn atom(mode: usize, label: Label) -> Self {
        FormalFactor::Atom { mode, label }
    }

    /// Panics if `i == j`.
    pub fn pair(composite: usize, i: Label, j: Label) -> Self {
        assert_ne!(i, j, "a composite needs two distinct particles");
        FormalFactor::Pair {
            composite,
            labels: (i.min(j), i.max(j)),
        }
    }

    pub fn min_label(&self) -> Label {
        match *self {
            FormalFactor::Atom { label, .. } => label,
            FormalFactor::Pair { labels, .. } => labels.0,
        }
    }

    fn push_labels(&self, out: &mut Vec<Label>) {
        match *self {
            FormalFactor::Atom { label, .. } => out.push(label),
            FormalFactor::Pair { labels, .. } => {
                out.push(labels.0);
                out.push(labels.1);
            }
        }
    }

    /// Applies a label map.
    pub fn relabel(&self, map: impl Fn(Label) -> Label) -> Self {
        match *self {
            FormalFactor::Atom { mode, label } => FormalFactor::atom(mode, map(label)),
            FormalFactor::Pair { composite, labels } => FormalFactor::pair(composite, map(labels.0), map(labels.1)),
        }
    }
}

impl fmt::Display for FormalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormalFactor::Atom { mode, label } => write!(f, "ψ{mode}({label})"),
            FormalFactor::Pair { composite, labels } => write!(f, "φ{composite}({},{})", labels.0, labels.1),
        }
    }
}

/// Sorts factors by smallest label and checks that no label repeats.
pub(crate) fn canonicalize(mut factors: Vec<FormalFactor>) -> Result<Vec<FormalFactor>, FormalError> {
    factors.sort_by_key(|f| f.min_label());
    let mut labels = Vec::with_capacity(factors.len() * 2);
    for f in &factors {
        f.push_labels(&mut labels);
    }
    labels.sort_unstable();
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(FormalError::DuplicateLabel(w[0]));
    }
    Ok(factors)
}

/// A weighted product of factors, each particle label used exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalProduct {
    weight: f64,
    factors: Vec<FormalFactor>,
}

impl FormalProduct {
    pub fn new(weight: f64, factors: Vec<FormalFactor>) -> Result<Self, FormalError> {
        Ok(Self {
            weight,
            factors: canonicalize(factors)?,
        })
    }

    pub fn unit(factors: Vec<FormalFactor>) -> Result<Self, FormalError> {
        Self::new(1.0, factors)
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn factors(&self) -> &[FormalFactor] {
        &self.factors
    }

    /// Sorted label set.
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        for f in &self.factors {
            f.push_labels(&mut out);
        }
        out.sort_unstable();
        out
    }
}

impl fmt::Display for FormalProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·", self.weight)?;
        for factor in &self.factors {
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// Idealized overlap: `weight_bra * weight_ket` when both products have the
/// same factors, zero otherwise.
pub fn formal_inner_product(bra: &FormalProduct, ket: &FormalProduct) -> Result<f64, FormalError> {
    let (lb, lk) = (bra.labels(), ket.labels());
    if lb != lk {
        return Err(FormalError::LabelMismatch { bra: lb, ket: lk });
    }
    Ok(if bra.factors == ket.factors {
        bra.weight * ket.weight
    } else {
        0.0
    })
}

/// One term of a first-quantized operator acting on labeled particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorTerm {
    /// `O(i)`
    One(Label),
    /// `T(i,j)`
    Two(Label, Label),
}

/// A sum of one- and two-body terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Operator {
    terms: Vec<OperatorTerm>,
}

impl Operator {
    pub fn new(terms: Vec<OperatorTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    /// `sum_i O(i) + sum_{i<j} T(i,j)` over the given labels.
    pub fn cluster_hamiltonian(labels: &[Label]) -> Self {
        let mut terms: Vec<OperatorTerm> = labels.iter().map(|&l| OperatorTerm::One(l)).collect();
        for (a, &i) in labels.iter().enumerate() {
            for &j in &labels[a + 1..] {
                terms.push(OperatorTerm::Two(i, j));
            }
        }
        Self { terms }
    }

    /// `sum T(i,j)` over `i` in `left`, `j` in `right`.
    pub fn interaction_between(left: &[Label], right: &[Label]) -> Self {
        let terms = left
            .iter()
            .flat_map(|&i| right.iter().map(move |&j| OperatorTerm::Two(i, j)))
            .collect();
        Self { terms }
    }

    /// Operator sum `self + other`.
    pub fn plus(mut self, other: &Operator) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self
    }
}

/// Dense amplitude tensor of a product expanded into unbound-mode products,
/// indexed by the modes of the sorted labels (last label fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedProduct {
    labels: Vec<Label>,
    mode_count: usize,
    amplitudes: Vec<f64>,
}

impl ExpandedProduct {
    /// Expands `product`; composite factors contribute `c_alpha[p][q]`.
    pub fn expand(product: &FormalProduct, spectrum: &CompositeSpectrum) -> Result<Self, FormalError> {
        let m = spectrum.mode_count();
        let labels = product.labels();
        let k = labels.len();
        let pos = |l: Label| labels.binary_search(&l).expect("label present");
        for f in product.factors() {
            match *f {
                FormalFactor::Atom { mode, .. } if mode >= m => {
                    return Err(FormalError::ModeOutOfRange { mode, count: m })
                }
                FormalFactor::Pair { composite, .. } if composite >= spectrum.len() => {
                    return Err(FormalError::CompositeOutOfRange {
                        composite,
                        count: spectrum.len(),
                    })
                }
                _ => {}
            }
        }
        let size = m.pow(k as u32);
        let mut amplitudes = vec![0.0; size];
        let mut idx = vec![0usize; k];
        for (flat, amp) in amplitudes.iter_mut().enumerate() {
            let mut rest = flat;
            for slot in (0..k).rev() {
                idx[slot] = rest % m;
                rest /= m;
            }
            let mut a = product.weight();
            for f in product.factors() {
                match *f {
                    FormalFactor::Atom { mode, label } => {
                        if idx[pos(label)] != mode {
                            a = 0.0;
                            break;
                        }
                    }
                    FormalFactor::Pair {
                        composite,
                        labels: (i, j),
                    } => {
                        a *= spectrum.coefficient(composite, idx[pos(i)], idx[pos(j)]);
                    }
                }
                if a == 0.0 {
                    break;
                }
            }
            *amp = a;
        }
        Ok(Self {
            labels,
            mode_count: m,
            amplitudes,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    fn stride(&self, label: Label) -> Result<usize, FormalError> {
        let slot = self
            .labels
            .binary_search(&label)
            .map_err(|_| FormalError::OperatorLabel(label))?;
        Ok(self.mode_count.pow((self.labels.len() - 1 - slot) as u32))
    }

    /// Exact action of `op` on this expansion.
    pub fn apply(&self, op: &Operator, modes: &ModeSpace) -> Result<Self, FormalError> {
        let m = self.mode_count;
        let o = modes.one_body();
        let t = modes.two_body();
        let mut out = vec![0.0; self.amplitudes.len()];
        for term in op.terms() {
            match *term {
                OperatorTerm::One(i) => {
                    let s = self.stride(i)?;
                    for (flat, slot) in out.iter_mut().enumerate() {
                        let bra_mode = (flat / s) % m;
                        let base = flat - bra_mode * s;
                        let mut acc = 0.0;
                        for x in 0..m {
                            acc += o.get(bra_mode, x) * self.amplitudes[base + x * s];
                        }
                        *slot += acc;
                    }
                }
                OperatorTerm::Two(i, j) => {
                    if i == j {
                        return Err(FormalError::DegenerateTwoBody(i));
                    }
                    let (si, sj) = (self.stride(i)?, self.stride(j)?);
                    for (flat, slot) in out.iter_mut().enumerate() {
                        let a = (flat / si) % m;
                        let b = (flat / sj) % m;
                        let base = flat - a * si - b * sj;
                        let mut acc = 0.0;
                        for x in 0..m {
                            for y in 0..m {
                                let amp = self.amplitudes[base + x * si + y * sj];
                                if amp != 0.0 {
                                    acc += t.get(a, b, x, y) * amp;
                                }
                            }
                        }
                        *slot += acc;
                    }
                }
            }
        }
        Ok(Self {
            labels: self.labels.clone(),
            mode_count: m,
            amplitudes: out,
        })
    }

    /// Plain (non-idealized) overlap of two expansions over the same labels.
    pub fn dot(&self, other: &ExpandedProduct) -> Result<f64, FormalError> {
        if self.labels != other.labels {
            return Err(FormalError::LabelMismatch {
                bra: self.labels.clone(),
                ket: other.labels.clone(),
            });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a * b).sum())
    }
}

/// `<bra| op |ket>` by exact contraction, both weights included.
pub fn labeled_matrix_element(
    bra: &FormalProduct,
    op: &Operator,
    ket: &FormalProduct,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
) -> Result<f64, FormalError> {
    let (lb, lk) = (bra.labels(), ket.labels());
    if lb != lk {
        return Err(FormalError::LabelMismatch { bra: lb, ket: lk });
    }
    let ket = ExpandedProduct::expand(ket, spectrum)?.apply(op, modes)?;
    ExpandedProduct::expand(bra, spectrum)?.dot(&ket)
}
