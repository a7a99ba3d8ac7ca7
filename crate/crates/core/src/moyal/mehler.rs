use serde::{Deserialize, Serialize};

use super::MoyalError;
use crate::quad::{exp_sinh, tanh_sinh, Quadrature, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub omega: f64,
    pub theta: f64,
    pub mu2: f64,
}

impl OscillatorParams {
    pub fn new(omega: f64, theta: f64, mu2: f64) -> Result<Self, MoyalError> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(MoyalError::InvalidParameter(format!("Omega must lie in (0, 1], got {omega}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(MoyalError::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        if !(mu2 >= 0.0 && mu2.is_finite()) {
            return Err(MoyalError::InvalidParameter(format!("mu2 must be nonnegative, got {mu2}")));
        }
        Ok(OscillatorParams { omega, theta, mu2 })
    }

    /// `Ω̃ = Ω / (2θ)`.
    pub fn omega_tilde(&self) -> f64 {
        self.omega / (2.0 * self.theta)
    }
}

fn sq_dist(x: &[f64; 4], y: &[f64; 4], sign: f64) -> f64 {
    (0..4).map(|i| (x[i] + sign * y[i]).powi(2)).sum()
}

/// Integrand in terms of `u² = (x − y)²` and `v² = (x + y)²`, evaluated in log space.
pub fn mehler_uv(u2: f64, v2: f64, alpha: f64, p: &OscillatorParams) -> f64 {
    let w = p.omega_tilde();
    let half = 0.5 * alpha;
    let log = w.ln() - 2.0 * (2.0 * std::f64::consts::PI * alpha.sinh()).ln()
        - 0.25 * w * (u2 / half.tanh() + v2 * half.tanh());
    log.exp()
}

/// `K_α(x, y) = Ω̃/(2π sinh α)² · exp(−Ω̃/4 coth(α/2)(x−y)² − Ω̃/4 tanh(α/2)(x+y)²)`.
pub fn mehler_kernel(x: &[f64; 4], y: &[f64; 4], alpha: f64, p: &OscillatorParams) -> f64 {
    mehler_uv(sq_dist(x, y, -1.0), sq_dist(x, y, 1.0), alpha, p)
}

/// `∫₀^∞ K_α(x, y) e^{−μ²α} dα`. The integrand behaves like `α⁻²` at small α
/// when `x = y`, so coincident points are rejected.
pub fn propagator(x: &[f64; 4], y: &[f64; 4], p: &OscillatorParams, rel: f64) -> Result<Quadrature<f64>, MoyalError> {
    let u2 = sq_dist(x, y, -1.0);
    if u2 == 0.0 {
        return Err(MoyalError::CoincidentPoints);
    }
    let v2 = sq_dist(x, y, 1.0);
    exp_sinh(|a| mehler_uv(u2, v2, a, p) * (-p.mu2 * a).exp(), Tolerance::rel(rel)).map_err(|e| MoyalError::Quadrature(e.to_string()))
}

/// Slice `i`: `∫ K_α e^{−μ²α} dα` over `α ∈ [M^{−2(i+1)}, M^{−2i}]`.
pub fn sliced_propagator(i: u32, m: f64, u2: f64, v2: f64, p: &OscillatorParams) -> Result<f64, MoyalError> {
    let (a, b) = (m.powi(-2 * (i as i32 + 1)), m.powi(-2 * i as i32));
    tanh_sinh(|a| mehler_uv(u2, v2, a, p) * (-p.mu2 * a).exp(), a, b, Tolerance::rel(1e-12))
        .map(|q| q.value)
        .map_err(|e| MoyalError::Quadrature(e.to_string()))
}

/// Shape of the slice bound `K M^{prefactor·i} exp(−k(M^i|u| + M^{long·i}|v|))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundShape {
    pub prefactor: i32,
    pub long: i32,
}

impl BoundShape {
    /// The shape implied by the kernel: short variables decay on the scale
    /// `M^{−i}`, long ones on `M^{i}` since `tanh(α/2) ≈ α/2` in the slice.
    pub const KERNEL: BoundShape = BoundShape { prefactor: 2, long: -1 };
    /// The long exponent as printed alongside the sliced bound.
    pub const PRINTED: BoundShape = BoundShape { prefactor: 2, long: 1 };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceFit {
    pub slice: u32,
    /// `C^j(0, 0) / M^{prefactor·j}`, the smallest admissible constant.
    pub constant: f64,
    /// Largest `k` with the bound holding at every grid point given `constant`.
    pub rate: f64,
    /// Scaled grid point `(M^j|u|, M^{long·j}|v|)` fixing `rate`.
    pub tightest: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceBoundReport {
    pub shape: BoundShape,
    pub m: f64,
    pub slices: Vec<SliceFit>,
    /// Uniform constants over all scanned slices.
    pub constant: f64,
    pub rate: f64,
    pub ok: bool,
    /// First pair of consecutive slices where a constant drifts by a factor ≥ √M.
    pub violation: Option<String>,
}

/// Scanned scaled coordinates, shared by both variables.
pub const SLICE_GRID: [f64; 13] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0];

/// Fits `(K, k)` on slices `0..=i` over a grid in scaled variables and checks
/// that they are uniform in the slice index: between consecutive slices
/// `j − 1, j ≥ 1` neither `K` may grow nor `k` shrink by a factor `√M`.
/// A wrong power of `M` in the shape shows up as drift by a factor `M` or more.
pub fn slice_bound_check(i: u32, m: f64, p: &OscillatorParams, shape: BoundShape) -> Result<SliceBoundReport, MoyalError> {
    if !(m > 1.0) {
        return Err(MoyalError::InvalidParameter(format!("M must exceed 1, got {m}")));
    }
    let mut slices = Vec::new();
    for j in 0..=i {
        let su = m.powi(j as i32);
        let sv = m.powi(shape.long * j as i32);
        let scale = m.powi(shape.prefactor * j as i32);
        let constant = sliced_propagator(j, m, 0.0, 0.0, p)? / scale;
        let mut rate = f64::INFINITY;
        let mut tightest = (0.0, 0.0);
        for &a in &SLICE_GRID {
            for &b in &SLICE_GRID {
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                let (u, v) = (a / su, b / sv);
                let r = sliced_propagator(j, m, u * u, v * v, p)? / scale;
                if r > constant {
                    return Err(MoyalError::Invariant(format!("slice {j} is not maximal at the origin")));
                }
                let k = (constant / r).ln() / (a + b);
                if k < rate {
                    rate = k;
                    tightest = (a, b);
                }
            }
        }
        slices.push(SliceFit { slice: j, constant, rate, tightest });
    }
    let drift = m.sqrt();
    let mut violation = None;
    for w in slices.windows(2).skip(1) {
        if w[1].constant > drift * w[0].constant {
            violation = Some(format!("constant grows from slice {} to {}: {} -> {}", w[0].slice, w[1].slice, w[0].constant, w[1].constant));
            break;
        }
        if w[1].rate * drift < w[0].rate {
            violation = Some(format!(
                "rate shrinks from slice {} to {}: {} -> {} at scaled point {:?}",
                w[0].slice, w[1].slice, w[0].rate, w[1].rate, w[1].tightest
            ));
            break;
        }
    }
    let constant = slices.iter().map(|s| s.constant).fold(0.0, f64::max);
    let rate = slices.iter().map(|s| s.rate).fold(f64::INFINITY, f64::min);
    let ok = rate > 0.0 && constant.is_finite() && violation.is_none();
    Ok(SliceBoundReport { shape, m, slices, constant, rate, ok, violation })
}
