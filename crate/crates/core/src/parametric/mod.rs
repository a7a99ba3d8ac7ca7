//! Parametric representation: incidence matrices, the Gaussian form of the
//! amplitude, the HU polynomial, admissible pairs and HV/HU evaluation.

mod amplitude;
mod form;
mod hu;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use amplitude::{amplitude_eval, amplitude_quadrature, hv_over_hu, Amplitude, AmplitudeEvaluation, AmplitudeInput, QuadratureValue};
pub use form::{corner_sign, incidence, line_signs, Diag, FormVar, GaussianForm, HuVariant, IncidencePair};
pub use hu::{raw_block_determinant, HuPolynomial, Monomial, Normalization};

use crate::exact::{qi, Rational};
use crate::ribbon::{direct_multigraph, dual_graph, topology, RibbonGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParametricError {
    #[error("no admissible monomial with nonzero coefficient to anchor the normalization")]
    NoAdmissibleMonomial,
    #[error("HU = {0} is not positive at the requested point")]
    NonPositiveHu(f64),
    #[error("t-point has {found} entries, graph has {expected} lines")]
    Arity { expected: usize, found: usize },
    #[error("t-point outside the open unit cube")]
    OutsideCube,
    #[error("external data covers {found} legs, graph has {expected}")]
    ExternalArity { expected: usize, found: usize },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("singular internal block at the requested point")]
    Singular,
}

/// The paper's form `(Ω̃/2)·E` uses `s = 2/(θΩ̃) = 1/Ω`.
pub fn s_from_omega(omega: f64) -> f64 {
    1.0 / omega
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    /// `I` is always every line; kept for completeness of the record.
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub k: i64,
    /// Predicted power of `s`, `2g − k`.
    pub s_power: i64,
    /// Predicted coefficient `2^{2g}`.
    pub coefficient: Rational,
    /// `J` is exactly a dual spanning tree.
    pub leading: bool,
    /// The Pfaffian of this pair has odd size, so `n_{I,J} = 0` identically.
    pub parity_zero: bool,
}

impl AdmissiblePair {
    pub fn monomial(&self, n_lines: usize) -> Monomial {
        let mut t = vec![0u8; n_lines];
        for &l in &self.j {
            t[l] = 1;
        }
        Monomial { t, s: self.s_power as u32 }
    }
}

/// All pairs `(I = all lines, J)` with `J` containing a dual spanning tree and
/// its complement a direct spanning tree, sorted by monomial.
pub fn admissible_pairs(g: &RibbonGraph) -> Vec<AdmissiblePair> {
    let r = topology(g);
    let (nl, n, f, genus) = (r.l, r.n as i64, r.f, r.g as i64);
    let direct = direct_multigraph(g);
    let dual = dual_graph(g).as_multigraph();
    let mut out: Vec<AdmissiblePair> = (0u64..1 << nl)
        .filter_map(|mask| {
            let j: Vec<usize> = (0..nl).filter(|&l| mask >> l & 1 == 1).collect();
            let jc: Vec<usize> = (0..nl).filter(|&l| mask >> l & 1 == 0).collect();
            if !dual.spans(&j) || !direct.spans(&jc) {
                return None;
            }
            let k = (nl + j.len()) as i64 - nl as i64 - f as i64 + 1;
            let minor = nl as i64 - j.len() as i64 + n - 1;
            Some(AdmissiblePair {
                i: (0..nl).collect(),
                leading: j.len() + 1 == f,
                s_power: 2 * genus - k,
                coefficient: num_traits::pow(qi(2), 2 * genus as usize),
                parity_zero: minor % 2 == 1,
                k,
                j,
            })
        })
        .collect();
    out.sort_by(|a, b| a.monomial(nl).cmp(&b.monomial(nl)));
    out
}

/// Raw block determinant of the given variant, no normalization.
pub fn hu_raw(g: &RibbonGraph, variant: HuVariant) -> HuPolynomial {
    raw_block_determinant(&GaussianForm::new(g, variant))
}

/// The amputated HU polynomial, normalized on the least admissible monomial.
pub fn hu_extract(g: &RibbonGraph) -> Result<HuPolynomial, ParametricError> {
    let raw = hu_raw(g, HuVariant::Amputated);
    let pairs = admissible_pairs(g);
    let first = pairs.first().ok_or(ParametricError::NoAdmissibleMonomial)?;
    let hu = hu::anchor(raw, &first.monomial(g.n_lines()), &first.coefficient)?;
    debug_assert!(hu.terms.values().all(|c| !c.is_negative()));
    Ok(hu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermStatus {
    Match,
    Mismatch,
    /// Predicted nonzero but the pair has odd Pfaffian size and the slot is empty.
    ParityZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCheck {
    pub pair: AdmissiblePair,
    pub monomial: Monomial,
    pub found: Rational,
    pub status: TermStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadingTermReport {
    pub entries: Vec<TermCheck>,
}

impl LeadingTermReport {
    /// Every admissible monomial carries its predicted coefficient.
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| e.status == TermStatus::Match)
    }

    /// Every pair whose `J` is exactly a dual tree carries its predicted coefficient.
    pub fn leading_match(&self) -> bool {
        self.entries.iter().filter(|e| e.pair.leading).all(|e| e.status == TermStatus::Match)
    }

    /// Every failing entry is explained by the odd Pfaffian size.
    pub fn failures_explained(&self) -> bool {
        self.entries.iter().all(|e| e.status != TermStatus::Mismatch)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TermCheck> {
        self.entries.iter().filter(|e| e.status != TermStatus::Match)
    }
}

pub fn leading_term_check(g: &RibbonGraph, hu: &HuPolynomial, pairs: &[AdmissiblePair]) -> LeadingTermReport {
    let entries = pairs
        .iter()
        .map(|p| {
            let monomial = p.monomial(g.n_lines());
            let found = hu.coefficient(&monomial);
            let status = if found == p.coefficient {
                TermStatus::Match
            } else if p.parity_zero && found.is_zero() {
                TermStatus::ParityZero
            } else {
                TermStatus::Mismatch
            };
            TermCheck { pair: p.clone(), monomial, found, status }
        })
        .collect();
    LeadingTermReport { entries }
}
