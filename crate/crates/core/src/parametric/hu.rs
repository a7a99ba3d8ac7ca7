use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::form::{Diag, FormVar, GaussianForm, HuVariant};
use super::ParametricError;
use crate::exact::{pfaffian, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub t: Vec<u8>,
    pub s: u32,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.t.iter().map(|&e| e as u32).sum()
    }

    /// Total t-exponent carried by the given lines.
    pub fn degree_on(&self, lines: &[usize]) -> u32 {
        lines.iter().map(|&l| self.t[l] as u32).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `Π t · det(S + C)` as assembled.
    Raw,
    /// Raw polynomial times `factor`, chosen so that `anchor` carries its predicted coefficient.
    Anchored { factor: Rational, anchor: Monomial },
}

/// Polynomial in `t_1..t_L` and `s` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuPolynomial {
    pub n_lines: usize,
    pub variant: HuVariant,
    pub terms: BTreeMap<Monomial, Rational>,
    pub normalization: Normalization,
}

impl HuPolynomial {
    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &[f64], s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let tp: f64 = m.t.iter().zip(t).map(|(&e, &x)| x.powi(e as i32)).product();
                to_f64(c) * s.powi(m.s as i32) * tp
            })
            .sum()
    }

    pub fn eval_exact(&self, t: &[Rational], s: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c * num_traits::pow(s.clone(), m.s as usize);
            for (&e, x) in m.t.iter().zip(t) {
                term *= num_traits::pow(x.clone(), e as usize);
            }
            acc += term;
        }
        acc
    }

    /// Minimal total t-exponent carried by `lines` over all monomials.
    pub fn min_degree_on(&self, lines: &[usize]) -> u32 {
        self.terms.keys().map(|m| m.degree_on(lines)).min().unwrap_or(0)
    }

    fn scaled(mut self, factor: &Rational) -> Self {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self
    }

    /// One monomial per line, `coeff s^a t1^e1 ... tL^eL`, in monomial order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (m, c) in &self.terms {
            write!(out, "{c} s^{}", m.s).unwrap();
            for (l, e) in m.t.iter().enumerate() {
                write!(out, " t{}^{e}", l + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`HuPolynomial::dump`] back into terms.
    pub fn parse_terms(text: &str) -> Result<BTreeMap<Monomial, Rational>, String> {
        let mut terms = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let err = |what: &str| format!("line {}: {what}", lineno + 1);
            let mut parts = line.split_whitespace();
            let c: Rational = parts.next().ok_or_else(|| err("empty"))?.parse().map_err(|_| err("bad coefficient"))?;
            let s = parts
                .next()
                .and_then(|p| p.strip_prefix("s^"))
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| err("bad s power"))?;
            let t = parts
                .map(|p| p.split_once('^').and_then(|(_, e)| e.parse().ok()).ok_or_else(|| err("bad t power")))
                .collect::<Result<Vec<u8>, _>>()?;
            terms.insert(Monomial { t, s }, c);
        }
        Ok(terms)
    }
}

/// `Π t_ℓ · det(S + C)` of the internal block by principal-minor expansion:
/// with `S` diagonal and `C` antisymmetric, `det(S + C) = Σ_K Π_{k∈K} S_kk · Pf(C_{K^c})²`.
/// `C` is homogeneous in `s` once the delta variables are paired, so Pfaffians
/// are taken at `s = 1` and the power read off the minor size.
pub fn raw_block_determinant(form: &GaussianForm) -> HuPolynomial {
    let n = form.n_internal;
    let c: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| &form.c_s[i][j] + &form.c_0[i][j]).collect()).collect();
    let weighted: Vec<usize> = (0..n).filter(|&i| form.diag[i] != Diag::Zero).collect();
    let n_delta = (0..n).filter(|&i| matches!(form.vars[i], FormVar::R(_))).count();
    let nl = form.n_lines;
    let subsets: u64 = 1 << weighted.len();
    let parts: Vec<(Monomial, Rational)> = (0..subsets)
        .into_par_iter()
        .filter_map(|mask| {
            let mut in_k = vec![false; n];
            for (b, &i) in weighted.iter().enumerate() {
                in_k[i] = mask >> b & 1 == 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&i| !in_k[i]).collect();
            if rest.len() % 2 == 1 || rest.len() < 2 * n_delta {
                return None;
            }
            let sub: Vec<Vec<Rational>> = rest.iter().map(|&i| rest.iter().map(|&j| c[i][j].clone()).collect()).collect();
            let pf = pfaffian(&sub);
            if pf.is_zero() {
                return None;
            }
            let mut t = vec![1u8; nl];
            for (i, &k) in in_k.iter().enumerate() {
                match (k, form.diag[i]) {
                    (true, Diag::InvT(l)) => t[l] -= 1,
                    (true, Diag::T(l)) => t[l] += 1,
                    _ => {}
                }
            }
            let s = (rest.len() - 2 * n_delta) as u32;
            Some((Monomial { t, s }, &pf * &pf))
        })
        .collect();
    let mut terms: BTreeMap<Monomial, Rational> = BTreeMap::new();
    for (m, c) in parts {
        *terms.entry(m).or_insert_with(Rational::zero) += c;
    }
    terms.retain(|_, c| !c.is_zero());
    HuPolynomial { n_lines: nl, variant: form.variant, terms, normalization: Normalization::Raw }
}

/// Rescales a raw polynomial so that `anchor` has coefficient `target`.
pub fn anchor(raw: HuPolynomial, anchor: &Monomial, target: &Rational) -> Result<HuPolynomial, ParametricError> {
    let c = raw.coefficient(anchor);
    if c.is_zero() {
        return Err(ParametricError::NoAdmissibleMonomial);
    }
    let factor = target / &c;
    debug_assert!(factor.is_positive());
    let mut hu = raw.scaled(&factor);
    hu.normalization = Normalization::Anchored { factor, anchor: anchor.clone() };
    Ok(hu)
}
