use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::{FormVar, GaussianForm, HuVariant};
use super::hu::HuPolynomial;
use super::{hu_extract, ParametricError};
use crate::quad::{cube_c, Tolerance};
use crate::ribbon::RibbonGraph;

/// External data of an amplitude evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeInput {
    /// One 4-vector per external leg, in the graph's external order.
    pub x_e: Vec<[f64; 4]>,
    /// Root hypermomentum.
    pub p_root: [f64; 4],
    pub dimension: f64,
    pub theta: f64,
    pub omega: f64,
}

impl AmplitudeInput {
    pub fn omega_tilde(&self) -> f64 {
        self.omega / (2.0 * self.theta)
    }

    pub fn s(&self) -> f64 {
        1.0 / self.omega
    }

    /// All external positions and the hypermomentum vanish.
    pub fn is_source_free(&self) -> bool {
        self.x_e.iter().chain(std::iter::once(&self.p_root)).all(|x| x.iter().all(|&c| c == 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEvaluation {
    pub t: Vec<f64>,
    pub hu: f64,
    pub hv_over_hu: Complex64,
    pub integrand: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: Complex64,
    pub error: f64,
}

/// Complex coordinates of one symplectic block of a 4-vector.
fn block(x: &[f64; 4], b: usize) -> Complex64 {
    Complex64::new(x[2 * b], x[2 * b + 1])
}

/// `HV/HU` at a t-point: Schur complement of the internal block, summed over
/// the two symplectic blocks, times `Ω̃/2`.
pub fn hv_over_hu(form: &GaussianForm, t: &[f64], input: &AmplitudeInput) -> Result<Complex64, ParametricError> {
    assert_eq!(form.variant, HuVariant::Amputated);
    let m = form.eval(t, input.s());
    let n = form.len();
    let ni = form.n_internal;
    let ne = n - ni;
    let ot = input.omega_tilde();
    let mut total = Complex64::new(0.0, 0.0);
    let m_ii = m.view((0, 0), (ni, ni)).into_owned();
    let lu = m_ii.lu();
    if ni > 0 && lu.determinant() == 0.0 {
        return Err(ParametricError::Singular);
    }
    let m_ie = m.view((0, ni), (ni, ne)).into_owned();
    let m_ei = m.view((ni, 0), (ne, ni)).into_owned();
    let schur = if ni > 0 {
        m.view((ni, ni), (ne, ne)) - &m_ei * lu.solve(&m_ie).ok_or(ParametricError::Singular)?
    } else {
        m.view((ni, ni), (ne, ne)).into_owned()
    };
    let schur = schur.map(|x| Complex64::new(x, 0.0));
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut ext_index = 0;
    let mut w_of = |b: usize| -> DVector<Complex64> {
        ext_index = 0;
        DVector::from_iterator(
            ne,
            form.vars[ni..].iter().map(|v| match v {
                FormVar::Y(_) => {
                    let x = block(&input.x_e[ext_index], b) / sqrt2;
                    ext_index += 1;
                    x
                }
                FormVar::R(_) => block(&input.p_root, b) * (sqrt2 / ot),
                _ => unreachable!("only externals and the root source are external"),
            }),
        )
    };
    for b in 0..2 {
        let w = w_of(b);
        total += (w.adjoint() * &schur * &w)[(0, 0)];
    }
    Ok(total * (ot / 2.0))
}

/// Prepared amplitude of a graph: the Gaussian form and the normalized HU.
#[derive(Clone, Debug)]
pub struct Amplitude {
    pub form: GaussianForm,
    pub hu: HuPolynomial,
}

impl Amplitude {
    pub fn new(g: &RibbonGraph) -> Result<Self, ParametricError> {
        Ok(Amplitude { form: GaussianForm::new(g, HuVariant::Amputated), hu: hu_extract(g)? })
    }

    fn check(&self, input: &AmplitudeInput) -> Result<(), ParametricError> {
        let legs = self.form.vars.iter().filter(|v| matches!(v, FormVar::Y(_))).count();
        if input.x_e.len() != legs {
            return Err(ParametricError::ExternalArity { expected: legs, found: input.x_e.len() });
        }
        Ok(())
    }

    pub fn eval(&self, input: &AmplitudeInput, t: &[f64]) -> Result<AmplitudeEvaluation, ParametricError> {
        self.check(input)?;
        let nl = self.form.n_lines;
        if t.len() != nl {
            return Err(ParametricError::Arity { expected: nl, found: t.len() });
        }
        if t.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(ParametricError::OutsideCube);
        }
        let hu = self.hu.eval(t, input.s());
        if !(hu > 0.0) {
            return Err(ParametricError::NonPositiveHu(hu));
        }
        // HV is a quadratic form in the external data
        let hv = if input.is_source_free() { Complex64::new(0.0, 0.0) } else { hv_over_hu(&self.form, t, input)? };
        let d = input.dimension;
        let pref = (input.omega_tilde() / 2f64.powf(d / 2.0 - 1.0)).powi(nl as i32);
        let measure: f64 = t.iter().map(|x| (1.0 - x * x).powf(d / 2.0 - 1.0)).product();
        let integrand = (-hv).exp() * (pref * measure / hu.powf(d / 2.0));
        Ok(AmplitudeEvaluation { t: t.to_vec(), hu, hv_over_hu: hv, integrand })
    }

    pub fn quadrature(&self, input: &AmplitudeInput, rel: f64) -> Result<QuadratureValue, ParametricError> {
        self.check(input)?;
        let f = |t: &[f64]| self.eval(input, t).map(|e| e.integrand).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let q = cube_c(&f, self.form.n_lines, Tolerance::rel(rel)).map_err(|e| ParametricError::Quadrature(e.to_string()))?;
        if !q.value.re.is_finite() || !q.value.im.is_finite() {
            return Err(ParametricError::Quadrature("non-finite integrand".into()));
        }
        Ok(QuadratureValue { value: q.value, error: q.error })
    }
}

pub fn amplitude_eval(g: &RibbonGraph, input: &AmplitudeInput, t: &[f64]) -> Result<AmplitudeEvaluation, ParametricError> {
    Amplitude::new(g)?.eval(input, t)
}

pub fn amplitude_quadrature(g: &RibbonGraph, input: &AmplitudeInput) -> Result<QuadratureValue, ParametricError> {
    Amplitude::new(g)?.quadrature(input, 1e-6)
}
