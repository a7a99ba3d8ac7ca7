//! Star products and Mehler convolutions by direct quadrature.

use nalgebra::{Cholesky, DMatrix, DVector};
use ncphi4::moyal::{GaussianFunction, OscillatorParams, ThetaParam};
use ncphi4::quad::{gauss_hermite, tanh_sinh, Tolerance};
use num_complex::Complex64;
use rand::Rng;

pub type C = Complex64;

pub fn random_gaussian<R: Rng>(rng: &mut R) -> GaussianFunction {
    let a = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-0.5..0.5));
    let m = a.transpose() * a + DMatrix::identity(4, 4) * rng.gen_range(0.4..1.0);
    let mut mm = [[0.0; 4]; 4];
    for (i, row) in mm.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    let v = |rng: &mut R| [0; 4].map(|_| rng.gen_range(-1.0..1.0));
    let (c, p) = (v(rng), v(rng));
    let amp = C::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
    GaussianFunction::centered(c, mm, p, amp).unwrap()
}

pub fn point<R: Rng>(rng: &mut R) -> [f64; 4] {
    [0; 4].map(|_| rng.gen_range(-0.8..0.8))
}

pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

/// The defining double integral with the `y` integral done as a Gaussian
/// Fourier transform of `f` and the `z` integral on a Gauss–Hermite grid.
/// Needs a real quadratic matrix for `f`.
pub fn star_oracle(f: &GaussianFunction, g: &GaussianFunction, theta: f64, x: &[f64; 4], nodes: usize) -> C {
    let re = |m: &DMatrix<C>| m.map(|z| z.re);
    let th = ThetaParam::new(theta).unwrap().inverse();
    let mf = re(&f.quad);
    let mg = re(&g.quad);
    assert!(f.quad.iter().chain(g.quad.iter()).all(|z| z.im == 0.0));
    let xv = DVector::from_column_slice(x);
    let xc = xv.map(|t| C::new(t, 0.0));
    let cf = -xv.dot(&(&mf * &xv)) + f.linear.dot(&xc);
    let cg = -xv.dot(&(&mg * &xv)) + g.linear.dot(&xc);
    let a = mf.clone().try_inverse().unwrap();
    let ac = a.map(|t| C::new(t, 0.0));
    let gamma0 = &f.linear - (&mf * &xv).map(|t| C::new(2.0 * t, 0.0));
    // z exponent: −zᵀQz + ℓᵀz + κ
    let q = &mg + th.transpose() * &a * &th;
    let ell = &g.linear - (&mg * &xv).map(|t| C::new(2.0 * t, 0.0)) - (th.transpose().map(|t| C::new(t, 0.0)) * &ac * &gamma0) * C::i();
    let kappa = cf + cg + (gamma0.transpose() * &ac * &gamma0)[0] / 4.0;
    let pi = std::f64::consts::PI;
    let pref = f.amplitude * g.amplitude * pi * pi / (mf.determinant().sqrt() * pi.powi(4) * theta.powi(4));
    let chol = Cholesky::new(q.clone()).unwrap();
    let qinv = chol.inverse();
    let l = chol.l();
    let ell_re = ell.map(|z| z.re);
    let ell_im = ell.map(|z| z.im);
    let z0 = &qinv * &ell_re * 0.5;
    let shift = z0.dot(&(&q * &z0));
    let map = l.transpose().try_inverse().unwrap();
    let jac = 1.0 / l.determinant();
    let (xs, ws) = gauss_hermite(nodes);
    let mut acc = C::new(0.0, 0.0);
    for i in 0..nodes {
        for j in 0..nodes {
            for k in 0..nodes {
                for m in 0..nodes {
                    let z = &z0 + &map * DVector::from_column_slice(&[xs[i], xs[j], xs[k], xs[m]]);
                    acc += ws[i] * ws[j] * ws[k] * ws[m] * C::new(0.0, ell_im.dot(&z)).exp();
                }
            }
        }
    }
    pref * jac * (kappa + shift).exp() * acc
}

/// `∫ K_α(x, z) K_β(z, y) d⁴z` as a product of one-dimensional integrals.
pub fn convolution_oracle(x: &[f64; 4], y: &[f64; 4], a: f64, b: f64, p: &OscillatorParams) -> f64 {
    let w = p.omega_tilde();
    let coef = |t: f64| (0.25 * w / (0.5 * t).tanh(), 0.25 * w * (0.5 * t).tanh());
    let ((a1, b1), (a2, b2)) = (coef(a), coef(b));
    let pref = |t: f64| w / (2.0 * std::f64::consts::PI * t.sinh()).powi(2);
    let total = a1 + b1 + a2 + b2;
    let mut out = pref(a) * pref(b);
    for mu in 0..4 {
        let (xm, ym) = (x[mu], y[mu]);
        let center = ((a1 - b1) * xm + (a2 - b2) * ym) / total;
        let half = 40.0 / total.sqrt();
        let e = |z: f64| (-a1 * (xm - z).powi(2) - b1 * (xm + z).powi(2) - a2 * (z - ym).powi(2) - b2 * (z + ym).powi(2)).exp();
        out *= tanh_sinh(e, center - half, center + half, Tolerance::rel(1e-14)).unwrap().value;
    }
    out
}

