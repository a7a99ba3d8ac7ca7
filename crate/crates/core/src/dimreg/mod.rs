//! Hepp sectors and dimensional regularization: the sector change of
//! variables, the exponents `b′(G_i)`, first poles in `D`, the factorization
//! of the integrand under subgraph rescaling and single-pole Taylor subtraction.

mod factor;
mod taylor;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use factor::{
    broken_face_corners, factorization_check, leading_factorization, quotient_graph, subgraph_graph, FactorizationInput,
    FactorizationReport, FactorizationRow, LeadingFactorization,
};
pub use taylor::{
    fit_laurent, sector_amplitude, sector_sum, taylor_subtract, LaurentFit, SectorIntegrand, TaylorParams, TaylorReport,
};

use crate::exact::{qi, to_f64, Rational};
use crate::parametric::{hu_raw, HuPolynomial, HuVariant, ParametricError};
use crate::ribbon::{subgraph_slice, ComponentCounts, RibbonError, RibbonGraph, SubgraphSlice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimregError {
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("{0} lines is beyond the enumerable range")]
    TooManyLines(usize),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error(transparent)]
    Parametric(#[from] ParametricError),
    #[error("subgraph is not admissible here: {0}")]
    Subgraph(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("factorization of the leading part fails: {0}")]
    Factorization(String),
}

/// Largest line count for which all `2^L` slices are enumerated.
pub const MAX_LINES: usize = 20;

/// A total order on the lines: `order[0]` carries the smallest `t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HeppSector {
    pub order: Vec<usize>,
}

impl HeppSector {
    pub fn new(order: Vec<usize>, n_lines: usize) -> Result<Self, DimregError> {
        let mut seen = vec![false; n_lines];
        if order.len() != n_lines {
            return Err(DimregError::InvalidSector(format!("{} entries for {n_lines} lines", order.len())));
        }
        for &l in &order {
            if l >= n_lines || std::mem::replace(&mut seen[l], true) {
                return Err(DimregError::InvalidSector(format!("line {l} out of range or repeated")));
            }
        }
        Ok(HeppSector { order })
    }

    /// Every sector of `n` lines, in lexicographic order of `order`.
    pub fn all(n: usize) -> Vec<HeppSector> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<HeppSector>) {
            if cur.len() == n {
                out.push(HeppSector { order: cur.clone() });
                return;
            }
            for l in 0..n {
                if !used[l] {
                    used[l] = true;
                    cur.push(l);
                    rec(n, cur, used, out);
                    cur.pop();
                    used[l] = false;
                }
            }
        }
        rec(n, &mut cur, &mut used, &mut out);
        out
    }

    pub fn n_lines(&self) -> usize {
        self.order.len()
    }

    /// Lines of `G_i`, the `i` smallest parameters.
    pub fn prefix(&self, i: usize) -> &[usize] {
        &self.order[..i]
    }

    /// Position of each line in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &l) in self.order.iter().enumerate() {
            pos[l] = p;
        }
        pos
    }

    /// The nested chain `G_1 ⊂ … ⊂ G_L`.
    pub fn chain(&self, g: &RibbonGraph) -> Result<Vec<SubgraphSlice>, DimregError> {
        (1..=self.order.len()).map(|i| Ok(subgraph_slice(g, self.prefix(i))?)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct XMonomial {
    pub x: Vec<u32>,
    pub s: u32,
}

/// HU after `t_ℓ = Π_{j ≥ pos(ℓ)} x_j²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XPolynomial {
    pub sector: HeppSector,
    pub terms: BTreeMap<XMonomial, Rational>,
}

impl XPolynomial {
    pub fn eval(&self, x: &[f64], s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| to_f64(c) * s.powi(m.s as i32) * m.x.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Smallest degree in `x_i` over all monomials.
    pub fn min_degree(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.x[i]).min().unwrap_or(0)
    }

    /// Divides out `Π x_i^{min degree}`; returns the exponents removed and the quotient.
    pub fn factor_minimal(&self) -> (Vec<u32>, XPolynomial) {
        let n = self.sector.n_lines();
        let mins: Vec<u32> = (0..n).map(|i| self.min_degree(i)).collect();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (XMonomial { x: m.x.iter().zip(&mins).map(|(a, b)| a - b).collect(), s: m.s }, c.clone()))
            .collect();
        (mins, XPolynomial { sector: self.sector.clone(), terms })
    }

    /// Some monomial has degree zero in every `x_i`, so the polynomial is
    /// nonzero at the origin of the sector.
    pub fn has_constant_term(&self) -> bool {
        self.terms.iter().any(|(m, c)| !c.is_zero() && m.x.iter().all(|&e| e == 0))
    }
}

pub fn substitute_sector(hu: &HuPolynomial, sigma: &HeppSector) -> Result<XPolynomial, DimregError> {
    if sigma.n_lines() != hu.n_lines {
        return Err(DimregError::InvalidSector(format!("sector has {} lines, HU has {}", sigma.n_lines(), hu.n_lines)));
    }
    let n = hu.n_lines;
    let mut terms: BTreeMap<XMonomial, Rational> = BTreeMap::new();
    for (m, c) in &hu.terms {
        let mut x = vec![0u32; n];
        let mut acc = 0;
        for (i, xi) in x.iter_mut().enumerate() {
            acc += 2 * m.t[sigma.order[i]] as u32;
            *xi = acc;
        }
        *terms.entry(XMonomial { x, s: m.s }).or_insert_with(Rational::zero) += c;
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(XPolynomial { sector: sigma.clone(), terms })
}

/// The HU used for `b′` and pole location.
pub fn pole_hu(g: &RibbonGraph) -> HuPolynomial {
    hu_raw(g, HuVariant::Smeared)
}

/// Minimal total t-exponent carried by the lines of `G_i`.
pub fn b_prime(hu: &HuPolynomial, sigma: &HeppSector, i: usize) -> u32 {
    if i == 0 {
        return 0;
    }
    hu.min_degree_on(sigma.prefix(i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BPrimeCase {
    /// `g > 0`: `b′ ≤ L − (n − 1) − 2g`.
    Genus,
    /// `g = 0, B > 1`: `b′ ≤ L − n`.
    MultiBroken,
    /// `g = 0, B = 1`: `b′ = L − (n − 1)`.
    PlanarRegular,
    /// `B = 0`, a vacuum graph. None of the three cases applies.
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub counts: ComponentCounts,
    pub case: BPrimeCase,
    /// `None` for a closed component.
    pub bound: Option<i64>,
}

pub fn component_bound(c: &ComponentCounts) -> ComponentBound {
    let (l, n, g) = (c.l as i64, c.n as i64, c.g as i64);
    let (case, bound) = if c.b == 0 {
        (BPrimeCase::Closed, None)
    } else if c.g > 0 {
        (BPrimeCase::Genus, Some(l - (n - 1) - 2 * g))
    } else if c.b > 1 {
        (BPrimeCase::MultiBroken, Some(l - n))
    } else {
        (BPrimeCase::PlanarRegular, Some(l - (n - 1)))
    };
    ComponentBound { counts: *c, case, bound }
}

/// Per-component case bounds of a slice, summed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologicalBound {
    pub components: Vec<ComponentBound>,
    /// `None` when some component is closed.
    pub bound: Option<i64>,
    /// Every component is planar regular, so the bound is an equality.
    pub exact: bool,
}

impl TopologicalBound {
    pub fn admits(&self, b: u32) -> bool {
        match self.bound {
            Some(bound) if self.exact => b as i64 == bound,
            Some(bound) => b as i64 <= bound,
            None => true,
        }
    }
}

pub fn b_prime_topological(slice: &SubgraphSlice) -> TopologicalBound {
    let components: Vec<ComponentBound> = slice.components.iter().map(component_bound).collect();
    TopologicalBound {
        bound: components.iter().map(|c| c.bound).sum::<Option<i64>>(),
        exact: components.iter().all(|c| c.case == BPrimeCase::PlanarRegular),
        components,
    }
}

/// `2L/b′`, or `None` for `b′ = 0`.
pub fn first_pole(l: usize, b: u32) -> Option<Rational> {
    (b > 0).then(|| Rational::new((2 * l as i64).into(), (b as i64).into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorStep {
    pub i: usize,
    pub lines: Vec<usize>,
    pub slice: SubgraphSlice,
    pub b_prime: u32,
    pub bound: TopologicalBound,
    pub first_pole: Option<Rational>,
}

impl SectorStep {
    /// `e_i(D) = 2L(G_i) − 1 − D b′(G_i)`.
    pub fn exponent(&self, d: f64) -> f64 {
        (2 * self.i) as f64 - 1.0 - d * self.b_prime as f64
    }

    pub fn exponent_exact(&self, d: &Rational) -> Rational {
        qi(2 * self.i as i64 - 1) - d * qi(self.b_prime as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorExponents {
    pub sector: HeppSector,
    pub steps: Vec<SectorStep>,
}

pub fn sector_exponents(g: &RibbonGraph, hu: &HuPolynomial, sigma: &HeppSector) -> Result<SectorExponents, DimregError> {
    let chain = sigma.chain(g)?;
    let steps = chain
        .into_iter()
        .enumerate()
        .map(|(k, slice)| {
            let i = k + 1;
            let b = b_prime(hu, sigma, i);
            SectorStep {
                i,
                lines: sigma.prefix(i).to_vec(),
                bound: b_prime_topological(&slice),
                first_pole: first_pole(i, b),
                b_prime: b,
                slice,
            }
        })
        .collect();
    Ok(SectorExponents { sector: sigma.clone(), steps })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pole {
    pub dimension: Rational,
    /// Smallest slice producing this pole (fewest lines, then lexicographic).
    pub slice: Vec<usize>,
    pub b_prime: u32,
    /// Number of slices sharing this pole.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleReport {
    pub n_lines: usize,
    /// Distinct first poles, increasing.
    pub poles: Vec<Pole>,
    /// Pole of the full graph, `2L/b′(G)`.
    pub superficial: Option<Rational>,
}

impl PoleReport {
    pub fn first(&self) -> Option<&Rational> {
        self.poles.first().map(|p| &p.dimension)
    }

    /// Some sector integral diverges at `d`.
    pub fn diverges_at(&self, d: &Rational) -> bool {
        self.first().is_some_and(|p| p <= d)
    }

    /// The full graph's own integral diverges at `d`.
    pub fn superficially_divergent_at(&self, d: &Rational) -> bool {
        self.superficial.as_ref().is_some_and(|p| p <= d)
    }
}

/// Union over all sectors of the first poles. Every nonempty line set is a
/// prefix of some sector, so the slices are enumerated directly.
pub fn locate_poles_with(hu: &HuPolynomial) -> Result<PoleReport, DimregError> {
    let nl = hu.n_lines;
    if nl > MAX_LINES {
        return Err(DimregError::TooManyLines(nl));
    }
    let mut slices: Vec<Vec<usize>> =
        (1u64..1 << nl).map(|mask| (0..nl).filter(|&l| mask >> l & 1 == 1).collect()).collect();
    slices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut poles: BTreeMap<Rational, Pole> = BTreeMap::new();
    for s in slices {
        let b = hu.min_degree_on(&s);
        if let Some(d) = first_pole(s.len(), b) {
            poles
                .entry(d.clone())
                .and_modify(|p| p.multiplicity += 1)
                .or_insert(Pole { dimension: d, slice: s, b_prime: b, multiplicity: 1 });
        }
    }
    let all: Vec<usize> = (0..nl).collect();
    let superficial = if nl == 0 { None } else { first_pole(nl, hu.min_degree_on(&all)) };
    Ok(PoleReport { n_lines: nl, poles: poles.into_values().collect(), superficial })
}

pub fn locate_poles(g: &RibbonGraph) -> Result<PoleReport, DimregError> {
    if g.n_lines() > MAX_LINES {
        return Err(DimregError::TooManyLines(g.n_lines()));
    }
    locate_poles_with(&pole_hu(g))
}
