//! Double-exponential quadrature with step halving, plus Gauss–Hermite nodes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature did not converge: value {value}, last change {estimate} after {levels} halvings")]
pub struct QuadError {
    pub value: f64,
    pub estimate: f64,
    pub levels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Magnitude of the change between the last two refinements.
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_levels: usize,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance { rel, abs: 0.0, max_levels: 12 }
    }

    fn met(&self, change: f64, value: f64) -> bool {
        change <= self.rel * value || change <= self.abs
    }
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Node of the tanh-sinh rule on [−1, 1]: `(1 − |x|, weight)` for abscissa
/// `τ`; the complement is returned directly to keep endpoint resolution.
fn tanh_sinh_node(tau: f64) -> (f64, f64) {
    let u = HALF_PI * tau.sinh();
    let c = u.cosh();
    let comp = 1.0 / (u.abs().exp() * c);
    (comp, HALF_PI * tau.cosh() / (c * c))
}

/// `∫_a^b f` for complex `f`, halving the step until two successive levels agree.
pub fn tanh_sinh_c(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: Tolerance) -> Result<Quadrature<Complex64>, QuadError> {
    let half = 0.5 * (b - a);
    let eval = |tau: f64| -> Option<Complex64> {
        let (comp, w) = tanh_sinh_node(tau);
        let d = half * comp;
        if w < 1e-300 || d == 0.0 {
            return None;
        }
        let x = if tau < 0.0 { a + d } else { b - d };
        if x <= a || x >= b {
            return None;
        }
        let v = f(x) * (w * half);
        // an overflowing integrable endpoint singularity: the remaining tail is negligible
        if !(v.re.is_finite() && v.im.is_finite()) && d < 1e-100 * (b - a) {
            return None;
        }
        Some(v)
    };
    // sum over the odd multiples of h (or all multiples for the first level)
    let sweep = |h: f64, step: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if step == 1 {
            acc += eval(0.0).unwrap_or_default();
        }
        for dir in [1.0, -1.0] {
            let mut k = 1;
            loop {
                match eval(dir * k as f64 * h) {
                    Some(v) => acc += v,
                    None => break,
                }
                k += step;
            }
        }
        acc
    };
    let mut h = 1.0;
    let mut sum = sweep(h, 1);
    let mut prev = sum * h;
    for level in 1..=tol.max_levels {
        h *= 0.5;
        sum += sweep(h, 2);
        let cur = sum * h;
        let change = (cur - prev).norm();
        if level >= 3 && tol.met(change, cur.norm()) {
            return Ok(Quadrature { value: cur, error: change });
        }
        if !cur.re.is_finite() || !cur.im.is_finite() {
            return Err(QuadError { value: f64::NAN, estimate: f64::NAN, levels: level });
        }
        prev = cur;
    }
    Err(QuadError { value: prev.norm(), estimate: f64::NAN, levels: tol.max_levels })
}

pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Quadrature<f64>, QuadError> {
    let q = tanh_sinh_c(|x| Complex64::new(f(x), 0.0), a, b, tol)?;
    Ok(Quadrature { value: q.value.re, error: q.error })
}

/// `∫_0^∞ f` via `x = exp(π/2·sinh τ)`.
pub fn exp_sinh(f: impl Fn(f64) -> f64, tol: Tolerance) -> Result<Quadrature<f64>, QuadError> {
    let eval = |tau: f64| -> Option<f64> {
        let x = (HALF_PI * tau.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return None;
        }
        let w = HALF_PI * tau.cosh() * x;
        let v = f(x) * w;
        Some(if v.is_finite() { v } else { f64::NAN })
    };
    let sweep = |h: f64, step: usize| -> f64 {
        let mut acc = 0.0;
        if step == 1 {
            acc += eval(0.0).unwrap_or(0.0);
        }
        for dir in [1.0, -1.0] {
            let mut k = 1;
            let mut small = 0;
            loop {
                let Some(v) = eval(dir * k as f64 * h) else { break };
                acc += v;
                // stop once the tail is negligible for several consecutive nodes
                small = if v.abs() < 1e-300 || (acc != 0.0 && v.abs() < 1e-18 * acc.abs()) { small + 1 } else { 0 };
                if small > 4 {
                    break;
                }
                k += step;
            }
        }
        acc
    };
    let mut h = 0.5;
    let mut sum = sweep(h, 1);
    let mut prev = sum * h;
    for level in 1..=tol.max_levels {
        h *= 0.5;
        sum += sweep(h, 2);
        let cur = sum * h;
        if !cur.is_finite() {
            return Err(QuadError { value: cur, estimate: f64::NAN, levels: level });
        }
        let change = (cur - prev).abs();
        if level >= 3 && tol.met(change, cur.abs()) {
            return Ok(Quadrature { value: cur, error: change });
        }
        prev = cur;
    }
    Err(QuadError { value: prev, estimate: f64::NAN, levels: tol.max_levels })
}

/// Nested tanh-sinh over the unit cube `(0, 1)^dim`.
pub fn cube_c(f: &(dyn Fn(&[f64]) -> Complex64 + Sync), dim: usize, tol: Tolerance) -> Result<Quadrature<Complex64>, QuadError> {
    fn inner(
        f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
        point: &mut Vec<f64>,
        dim: usize,
        tol: Tolerance,
        err: &mut f64,
    ) -> Result<Complex64, QuadError> {
        if point.len() == dim {
            return Ok(f(point));
        }
        let cell = std::cell::RefCell::new((point.clone(), 0.0f64, None::<QuadError>));
        let q = tanh_sinh_c(
            |x| {
                let mut c = cell.borrow_mut();
                let (p, e, failure) = &mut *c;
                p.push(x);
                let mut sub_err = 0.0;
                let v = match inner(f, p, dim, tol, &mut sub_err) {
                    Ok(v) => v,
                    Err(q) => {
                        *failure = Some(q);
                        Complex64::new(f64::NAN, 0.0)
                    }
                };
                *e = e.max(sub_err);
                p.pop();
                v
            },
            0.0,
            1.0,
            tol,
        );
        let (_, sub, failure) = cell.into_inner();
        if let Some(q) = failure {
            return Err(q);
        }
        let q = q?;
        *err = err.max(q.error + sub);
        Ok(q.value)
    }
    if dim == 0 {
        return Ok(Quadrature { value: f(&[]), error: 0.0 });
    }
    let mut err = 0.0;
    let v = inner(f, &mut Vec::with_capacity(dim), dim, tol, &mut err)?;
    Ok(Quadrature { value: v, error: err })
}

/// Gauss–Hermite nodes and weights for `∫ e^{−x²} f(x) dx` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { ((i.max(j)) as f64 / 2.0).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
