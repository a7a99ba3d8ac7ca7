use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{substitute_sector, DimregError, HeppSector};
use crate::exact::to_f64;
use crate::parametric::{hu_extract, HuPolynomial};
use crate::quad::{cube_c, Tolerance};
use crate::ribbon::RibbonGraph;

/// Amplitude at vanishing external data, where `HV = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorParams {
    pub theta: f64,
    pub omega: f64,
    /// Relative tolerance of every cube quadrature.
    pub rel: f64,
}

impl TaylorParams {
    fn omega_tilde(&self) -> f64 {
        self.omega / (2.0 * self.theta)
    }

    /// `(Ω̃ / 2^{D/2 − 1})^L`.
    fn prefactor(&self, d: f64, l: usize) -> f64 {
        (self.omega_tilde() / 2f64.powf(d / 2.0 - 1.0)).powi(l as i32)
    }
}

/// One sector of the amplitude in the variables `x`, with `Π x_i^{2b′_i}`
/// divided out of HU.
#[derive(Clone, Debug)]
pub struct SectorIntegrand {
    pub sector: HeppSector,
    /// `b′(G_i)` of the amplitude's HU, `i = 1..L`.
    pub b_prime: Vec<u32>,
    reduced: Vec<(f64, Vec<i32>)>,
}

impl SectorIntegrand {
    pub fn new(hu: &HuPolynomial, sigma: &HeppSector, s: f64) -> Result<Self, DimregError> {
        let x = substitute_sector(hu, sigma)?;
        let (mins, red) = x.factor_minimal();
        if !red.has_constant_term() {
            return Err(DimregError::Unsupported(format!(
                "sector {:?}: no monomial is minimal in every variable",
                sigma.order
            )));
        }
        let reduced = red
            .terms
            .iter()
            .map(|(m, c)| (to_f64(c) * s.powi(m.s as i32), m.x.iter().map(|&e| e as i32).collect()))
            .collect();
        Ok(SectorIntegrand { sector: sigma.clone(), b_prime: mins.iter().map(|m| m / 2).collect(), reduced })
    }

    pub fn n_lines(&self) -> usize {
        self.b_prime.len()
    }

    /// `a_i = e_i + 1 = 2L(G_i) − D b′(G_i)` for the 0-based step `i`.
    pub fn a(&self, i: usize, d: f64) -> f64 {
        (2 * (i + 1)) as f64 - d * self.b_prime[i] as f64
    }

    /// `2^L R(x)^{−D/2} Π_ℓ (1 − t_ℓ²)^{D/2 − 1}`, the integrand after `Π x_i^{a_i − 1}`.
    pub fn phi(&self, x: &[f64], d: f64) -> f64 {
        let n = self.n_lines();
        let r: f64 = self.reduced.iter().map(|(c, e)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k)).product::<f64>()).sum();
        let mut t = 1.0;
        let mut measure = 1.0;
        for j in (0..n).rev() {
            t *= x[j] * x[j];
            measure *= (1.0 - t * t).powf(d / 2.0 - 1.0);
        }
        2f64.powi(n as i32) * measure / r.powf(d / 2.0)
    }
}

fn cube(f: &(dyn Fn(&[f64]) -> f64 + Sync), dim: usize, rel: f64) -> Result<f64, DimregError> {
    let g = |y: &[f64]| Complex64::new(f(y), 0.0);
    let q = cube_c(&g, dim, Tolerance::rel(rel)).map_err(|e| DimregError::Quadrature(e.to_string()))?;
    if !q.value.re.is_finite() {
        return Err(DimregError::Quadrature("non-finite sector integral".into()));
    }
    Ok(q.value.re)
}

/// `∫_0^1 x^{a−1} φ(x) dx = a⁻¹ ∫_0^1 φ(y^{1/a}) dy` in each variable.
fn sector_integral(si: &SectorIntegrand, d: f64, skip: Option<usize>, p: &TaylorParams) -> Result<f64, DimregError> {
    let n = si.n_lines();
    let vars: Vec<usize> = (0..n).filter(|&i| Some(i) != skip).collect();
    let a: Vec<f64> = (0..n).map(|i| si.a(i, d)).collect();
    if let Some(i) = vars.iter().find(|&&i| !(a[i] > 0.0)) {
        return Err(DimregError::Unsupported(format!("D = {d} is at or beyond the pole of step {} in sector {:?}", i + 1, si.sector.order)));
    }
    let f = |y: &[f64]| {
        let mut x = vec![0.0; n];
        for (k, &i) in vars.iter().enumerate() {
            x[i] = y[k].powf(1.0 / a[i]);
        }
        si.phi(&x, d)
    };
    let norm: f64 = vars.iter().map(|&i| 1.0 / a[i]).product();
    Ok(p.prefactor(d, n) * norm * cube(&f, vars.len(), p.rel)?)
}

/// Amplitude restricted to one sector at zero external data.
pub fn sector_amplitude(si: &SectorIntegrand, d: f64, p: &TaylorParams) -> Result<f64, DimregError> {
    sector_integral(si, d, None, p)
}

fn integrands(g: &RibbonGraph, p: &TaylorParams) -> Result<Vec<SectorIntegrand>, DimregError> {
    let hu = hu_extract(g)?;
    HeppSector::all(g.n_lines()).iter().map(|s| SectorIntegrand::new(&hu, s, 1.0 / p.omega)).collect()
}

/// Sum over all `L!` sectors, aggregated in sector order.
pub fn sector_sum(g: &RibbonGraph, d: f64, p: &TaylorParams) -> Result<f64, DimregError> {
    let parts: Vec<f64> =
        integrands(g, p)?.par_iter().map(|si| sector_amplitude(si, d, p)).collect::<Result<_, _>>()?;
    Ok(parts.iter().sum())
}

/// `A(D) = c₋₁/(D − 4) + c₀ + c₁(D − 4)` by least squares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentFit {
    pub c_minus1: f64,
    pub c0: f64,
    pub c1: f64,
    /// Largest absolute residual of the fitted points.
    pub residual: f64,
}

pub fn fit_laurent(points: &[(f64, f64)]) -> Result<LaurentFit, DimregError> {
    if points.len() < 3 {
        return Err(DimregError::Fit(format!("{} points for three coefficients", points.len())));
    }
    let a = DMatrix::from_fn(points.len(), 3, |r, c| {
        let e = points[r].0 - 4.0;
        [1.0 / e, 1.0, e][c]
    });
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| DimregError::Fit(e.to_string()))?;
    let residual = (&a * &sol - &b).amax();
    Ok(LaurentFit { c_minus1: sol[0], c0: sol[1], c1: sol[2], residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorPole {
    pub sector: HeppSector,
    /// 1-based step whose exponent reaches −1 at `D = 4`.
    pub step: usize,
    /// Sector contribution to `c₋₁`.
    pub residue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    /// `(D, A(D))` with `D → 4⁻`.
    pub points: Vec<(f64, f64)>,
    /// Fit on the last four points.
    pub fit: LaurentFit,
    /// Finite part from the subtracted integrand.
    pub subtracted: f64,
    /// `c₋₁` from the residues of the sector integrals.
    pub residue: f64,
    pub sector_poles: Vec<SectorPole>,
}

/// Distances `4 − D` of the sampled dimensions.
pub const TAYLOR_STEPS: [f64; 8] = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125, 0.0015625];

/// Step for the derivative in `D` of the residue integrals.
const DERIVATIVE_STEP: f64 = 1e-3;

/// Single-pole subtraction at `D = 4` for a graph whose only divergent
/// slices at `D = 4` are exactly `S`.
pub fn taylor_subtract(g: &RibbonGraph, s_lines: &[usize], p: &TaylorParams) -> Result<TaylorReport, DimregError> {
    let mut s_sorted = s_lines.to_vec();
    s_sorted.sort_unstable();
    let sis = integrands(g, p)?;
    let mut poles = Vec::with_capacity(sis.len());
    for si in &sis {
        let mut pole = None;
        for i in 0..si.n_lines() {
            let (two_l, b4) = (2 * (i + 1) as u32, 4 * si.b_prime[i]);
            if two_l < b4 {
                return Err(DimregError::Unsupported(format!(
                    "step {} of sector {:?} has its first pole below 4",
                    i + 1,
                    si.sector.order
                )));
            }
            if two_l == b4 {
                let mut lines = si.sector.prefix(i + 1).to_vec();
                lines.sort_unstable();
                if lines != s_sorted {
                    return Err(DimregError::Unsupported(format!("divergent slice {lines:?} is not the subtracted subgraph {s_sorted:?}")));
                }
                pole = Some(i);
            }
        }
        poles.push(pole);
    }
    let points: Vec<(f64, f64)> =
        TAYLOR_STEPS.iter().map(|&delta| Ok((4.0 - delta, sector_sum(g, 4.0 - delta, p)?))).collect::<Result<_, DimregError>>()?;
    let fit = fit_laurent(&points[points.len() - 4..])?;

    let parts: Vec<(f64, Option<SectorPole>)> = sis
        .par_iter()
        .zip(poles.par_iter())
        .map(|(si, pole)| -> Result<(f64, Option<SectorPole>), DimregError> {
            let Some(k) = *pole else {
                return Ok((sector_amplitude(si, 4.0, p)?, None));
            };
            let b = si.b_prime[k] as f64;
            let h = |d: f64| sector_integral(si, d, Some(k), p);
            let derivative = (h(4.0 + DERIVATIVE_STEP)? - h(4.0 - DERIVATIVE_STEP)?) / (2.0 * DERIVATIVE_STEP);
            let n = si.n_lines();
            let vars: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let a: Vec<f64> = (0..n).map(|i| si.a(i, 4.0)).collect();
            let f = |y: &[f64]| {
                let mut x = vec![0.0; n];
                for (m, &i) in vars.iter().enumerate() {
                    x[i] = y[m].powf(1.0 / a[i]);
                }
                let at0 = si.phi(&x, 4.0);
                x[k] = y[n - 1];
                (si.phi(&x, 4.0) - at0) / x[k]
            };
            let norm: f64 = vars.iter().map(|&i| 1.0 / a[i]).product();
            let finite = p.prefactor(4.0, n) * norm * cube(&f, n, p.rel)?;
            let residue = -h(4.0)? / b;
            Ok((finite - derivative / b, Some(SectorPole { sector: si.sector.clone(), step: k + 1, residue })))
        })
        .collect::<Result<_, _>>()?;
    let subtracted = parts.iter().map(|x| x.0).sum();
    let sector_poles: Vec<SectorPole> = parts.into_iter().filter_map(|x| x.1).collect();
    let residue = sector_poles.iter().map(|s| s.residue).sum();
    Ok(TaylorReport { points, fit, subtracted, residue, sector_poles })
}
