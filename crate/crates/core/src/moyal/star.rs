use nalgebra::{Cholesky, DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MoyalError;
use crate::quad::gauss_hermite;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The deformation matrix: two identical symplectic 2×2 blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaParam {
    pub theta: f64,
}

impl ThetaParam {
    pub fn new(theta: f64) -> Result<Self, MoyalError> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(MoyalError::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        Ok(ThetaParam { theta })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let t = self.theta;
        DMatrix::from_row_slice(4, 4, &[0.0, t, 0.0, 0.0, -t, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, t, 0.0, 0.0, -t, 0.0])
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        -self.matrix() / (self.theta * self.theta)
    }

    /// `|det θ| = θ⁴`.
    pub fn det(&self) -> f64 {
        self.theta.powi(4)
    }
}

/// `a · exp(−xᵀ M x + bᵀ x)` with complex symmetric `M` whose real part is
/// positive semidefinite. Gaussians with a center and plane waves are both
/// of this form.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFunction {
    pub amplitude: Complex64,
    pub quad: DMatrix<Complex64>,
    pub linear: DVector<Complex64>,
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

impl GaussianFunction {
    /// `A · exp(−(x − c)ᵀ M (x − c) + i p·x)` with `M` symmetric positive definite.
    pub fn centered(center: [f64; 4], m: [[f64; 4]; 4], p: [f64; 4], amplitude: Complex64) -> Result<Self, MoyalError> {
        let mm = DMatrix::from_fn(4, 4, |i, j| m[i][j]);
        if (&mm - mm.transpose()).amax() > 1e-14 * mm.amax() {
            return Err(MoyalError::InvalidParameter("quadratic matrix is not symmetric".into()));
        }
        if Cholesky::new(mm.clone()).is_none() {
            return Err(MoyalError::InvalidParameter("quadratic matrix is not positive definite".into()));
        }
        let c = DVector::from_column_slice(&center);
        let mc = &mm * &c;
        let linear = DVector::from_fn(4, |i, _| Complex64::new(2.0 * mc[i], p[i]));
        let amplitude = amplitude * (-c.dot(&mc)).exp();
        Ok(GaussianFunction { amplitude, quad: complexify(&mm), linear })
    }

    /// `exp(i p·x)`.
    pub fn plane_wave(p: [f64; 4]) -> Self {
        GaussianFunction {
            amplitude: Complex64::new(1.0, 0.0),
            quad: DMatrix::zeros(4, 4),
            linear: DVector::from_fn(4, |i, _| I * p[i]),
        }
    }

    pub fn constant(a: Complex64) -> Self {
        GaussianFunction { amplitude: a, quad: DMatrix::zeros(4, 4), linear: DVector::zeros(4) }
    }

    pub fn eval(&self, x: &[f64; 4]) -> Complex64 {
        let xv = DVector::from_fn(4, |i, _| Complex64::new(x[i], 0.0));
        let e = -(xv.transpose() * &self.quad * &xv)[0] + self.linear.dot(&xv);
        self.amplitude * e.exp()
    }

    /// Pointwise product, the θ → 0 limit of the star product.
    pub fn pointwise(&self, other: &Self) -> Self {
        GaussianFunction {
            amplitude: self.amplitude * other.amplitude,
            quad: &self.quad + &other.quad,
            linear: &self.linear + &other.linear,
        }
    }

    fn real_part_psd(&self) -> bool {
        let re = self.quad.map(|z| z.re);
        let sym = (&re + re.transpose()) * 0.5;
        let scale = sym.amax().max(1.0);
        sym.symmetric_eigenvalues().iter().all(|&l| l >= -1e-10 * scale)
    }
}

/// `√det` on the branch continuous from the real part: the Hermitian part is
/// positive so every eigenvalue has positive real part, and the product of
/// principal roots is the analytic continuation.
pub(crate) fn sqrt_det(m: DMatrix<Complex64>) -> Option<Complex64> {
    let ev = Schur::new(m).eigenvalues()?;
    Some(ev.iter().map(|l| l.sqrt()).product())
}

/// Closed form of the double Gaussian integral defining `f ⋆ g`:
/// `∫ e^{−wᵀKw + Jᵀw} d⁸w = π⁴ / √det K · e^{JᵀK⁻¹J/4}` with
/// `K = [[M_f, iθ⁻¹], [−iθ⁻¹, M_g]]`.
pub fn star_product(f: &GaussianFunction, g: &GaussianFunction, theta: &ThetaParam) -> Result<GaussianFunction, MoyalError> {
    let th = complexify(&theta.inverse());
    let mut k = DMatrix::<Complex64>::zeros(8, 8);
    k.view_mut((0, 0), (4, 4)).copy_from(&f.quad);
    k.view_mut((4, 4), (4, 4)).copy_from(&g.quad);
    k.view_mut((0, 4), (4, 4)).copy_from(&(&th * I));
    k.view_mut((4, 0), (4, 4)).copy_from(&(&th * -I));
    let kinv = k.clone().try_inverse().ok_or(MoyalError::Degenerate)?;
    let root = sqrt_det(k).ok_or(MoyalError::Degenerate)?;
    if root.norm() == 0.0 || !root.is_finite() {
        return Err(MoyalError::Degenerate);
    }
    let mut p = DMatrix::<Complex64>::zeros(8, 4);
    p.view_mut((0, 0), (4, 4)).copy_from(&f.quad);
    p.view_mut((4, 0), (4, 4)).copy_from(&g.quad);
    let mut j0 = DVector::<Complex64>::zeros(8);
    j0.rows_mut(0, 4).copy_from(&f.linear);
    j0.rows_mut(4, 4).copy_from(&g.linear);
    let pk = p.transpose() * &kinv;
    let quad = &f.quad + &g.quad - &pk * &p;
    let quad = (&quad + quad.transpose()) * Complex64::new(0.5, 0.0);
    let linear = &f.linear + &g.linear - &pk * &j0;
    let expo = (j0.transpose() * &kinv * &j0)[0] / 4.0;
    let amplitude = f.amplitude * g.amplitude / (theta.det() * root) * expo.exp();
    let out = GaussianFunction { amplitude, quad, linear };
    if !out.real_part_psd() {
        return Err(MoyalError::Closure("real part of the product's quadratic matrix is not positive semidefinite".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarValue {
    pub value: Complex64,
    pub error: f64,
    pub closed_form: bool,
}

/// `(f ⋆ g)(x)`: closed form, or the quadrature evaluation when the closed
/// form is degenerate.
pub fn star_product_at(
    f: &GaussianFunction,
    g: &GaussianFunction,
    theta: &ThetaParam,
    x: &[f64; 4],
    rel: f64,
) -> Result<StarValue, MoyalError> {
    match star_product(f, g, theta) {
        Ok(h) => Ok(StarValue { value: h.eval(x), error: 0.0, closed_form: true }),
        Err(MoyalError::Degenerate) => star_product_quadrature(f, g, theta, x, rel),
        Err(e) => Err(e),
    }
}

/// Quadrature evaluation of `(f ⋆ g)(x)`: the `z` integral against `g` is a
/// Gaussian Fourier transform, the remaining `y` integral is done on a tensor
/// Gauss–Hermite grid, doubling nodes until two grids agree to `rel`.
/// Needs positive definite real parts of both quadratic matrices.
pub fn star_product_quadrature(
    f: &GaussianFunction,
    g: &GaussianFunction,
    theta: &ThetaParam,
    x: &[f64; 4],
    rel: f64,
) -> Result<StarValue, MoyalError> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let th = complexify(&theta.inverse());
    let xv = DVector::from_fn(4, |i, _| c(x[i]));
    let ginv = g.quad.clone().try_inverse().ok_or(MoyalError::Degenerate)?;
    let groot = sqrt_det(g.quad.clone()).ok_or(MoyalError::Degenerate)?;
    let beta0 = &g.linear - (&g.quad * &xv) * c(2.0);
    let cg = -(xv.transpose() * &g.quad * &xv)[0] + g.linear.dot(&xv);
    let cf = -(xv.transpose() * &f.quad * &xv)[0] + f.linear.dot(&xv);
    // exponent in y: −yᵀQy + ℓᵀy + κ
    let q = &f.quad + th.transpose() * &ginv * &th;
    let ell = &f.linear - (&f.quad * &xv) * c(2.0) + th.transpose() * &ginv * &beta0 * I;
    let kappa = cf + cg + (beta0.transpose() * &ginv * &beta0)[0] / 4.0;
    let pref = f.amplitude * g.amplitude * std::f64::consts::PI.powi(2) / (std::f64::consts::PI.powi(4) * theta.det() * groot);

    let r = q.map(|z| z.re);
    let r = (&r + r.transpose()) * 0.5;
    let chol = Cholesky::new(r.clone()).ok_or(MoyalError::Degenerate)?;
    let l = chol.l();
    let rinv = chol.inverse();
    let y0 = &rinv * ell.map(|z| z.re) * 0.5;
    let lt_inv = l.transpose().try_inverse().ok_or(MoyalError::Degenerate)?;
    let jac = 1.0 / l.diagonal().product();
    let qi = q.map(|z| z.im);
    let base = y0.dot(&(&r * &y0));

    let integrate = |n: usize| -> Complex64 {
        let (nodes, weights) = gauss_hermite(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let xi = DVector::from_column_slice(&[nodes[a], nodes[b], nodes[cc], nodes[d]]);
                        let y = &y0 + &lt_inv * xi;
                        let phase = -y.dot(&(&qi * &y)) + ell.iter().zip(y.iter()).map(|(e, v)| e.im * v).sum::<f64>();
                        acc += weights[a] * weights[b] * weights[cc] * weights[d] * Complex64::new(0.0, phase).exp();
                    }
                }
            }
        }
        acc
    };
    let outer = pref * jac * (kappa + base).exp();
    let mut prev = integrate(12) * outer;
    for n in [18, 26, 36, 48] {
        let cur = integrate(n) * outer;
        let change = (cur - prev).norm();
        if change <= rel * cur.norm() {
            return Ok(StarValue { value: cur, error: change, closed_form: false });
        }
        prev = cur;
    }
    Err(MoyalError::Quadrature(format!("Gauss–Hermite star product did not reach {rel:e}; last value {prev}")))
}

/// TOML description of a function of the closed-form class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Gaussian { center: [f64; 4], matrix: [[f64; 4]; 4], phase: [f64; 4], amplitude: [f64; 2] },
    PlaneWave { phase: [f64; 4] },
    Constant { amplitude: [f64; 2] },
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self, MoyalError> {
        toml::from_str(text).map_err(|e| MoyalError::InvalidParameter(e.to_string()))
    }

    pub fn build(&self) -> Result<GaussianFunction, MoyalError> {
        match self {
            FunctionSpec::Gaussian { center, matrix, phase, amplitude } => {
                GaussianFunction::centered(*center, *matrix, *phase, Complex64::new(amplitude[0], amplitude[1]))
            }
            FunctionSpec::PlaneWave { phase } => Ok(GaussianFunction::plane_wave(*phase)),
            FunctionSpec::Constant { amplitude } => Ok(GaussianFunction::constant(Complex64::new(amplitude[0], amplitude[1]))),
        }
    }
}
