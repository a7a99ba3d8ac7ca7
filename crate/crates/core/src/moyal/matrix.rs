use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MoyalError;

/// An index in `ℕ²`, one component per symplectic plane.
pub type Index2 = [usize; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixBaseParams {
    pub omega: f64,
    pub theta: f64,
    pub mu2: f64,
}

fn delta(a: i64, b: usize) -> f64 {
    if a == b as i64 {
        1.0
    } else {
        0.0
    }
}

/// `G_{mn,kl}` term by term, with `μ²` on the diagonal and the second shift
/// term read as `δ_{n−1,k} δ_{m−1,l}` in each plane.
pub fn g_entry(m: Index2, n: Index2, k: Index2, l: Index2, p: &MatrixBaseParams) -> f64 {
    let (a, b) = (2.0 * (1.0 + p.omega * p.omega) / p.theta, 2.0 * (1.0 - p.omega * p.omega) / p.theta);
    let i = |x: usize| x as i64;
    let same = |q: usize| delta(i(n[q]), k[q]) * delta(i(m[q]), l[q]);
    let diag = same(0) * same(1);
    let mut out = (a * (n[0] + n[1] + m[0] + m[1]) as f64 + p.mu2) * diag;
    for (q, o) in [(0, 1), (1, 0)] {
        let up = ((k[q] * l[q]) as f64).sqrt() * delta(i(n[q]) + 1, k[q]) * delta(i(m[q]) + 1, l[q]);
        let down = ((m[q] * n[q]) as f64).sqrt() * delta(i(n[q]) - 1, k[q]) * delta(i(m[q]) - 1, l[q]);
        out -= b * (up + down) * same(o);
    }
    out
}

/// Position of `(m, n)` in the truncated basis, all components `< cutoff`.
pub fn state_index(m: Index2, n: Index2, cutoff: usize) -> usize {
    ((m[0] * cutoff + m[1]) * cutoff + n[0]) * cutoff + n[1]
}

pub fn state_of(idx: usize, cutoff: usize) -> (Index2, Index2) {
    let c = cutoff;
    ([idx / (c * c * c), idx / (c * c) % c], [idx / c % c, idx % c])
}

/// `G` on the truncated basis as sparse rows `(column, value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixBaseForm {
    pub cutoff: usize,
    pub params: MatrixBaseParams,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl MatrixBaseForm {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.rows[row].iter().find(|(c, _)| *c == col).map_or(0.0, |(_, v)| *v)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows.iter().enumerate().all(|(r, row)| row.iter().all(|&(c, v)| self.entry(c, r) == v))
    }
}

/// Assembles `G`; the only candidates for `(k, l)` are `(n, m)` shifted by one
/// unit in a single plane, every other entry of the formula vanishes.
pub fn matrix_base_form(cutoff: usize, params: &MatrixBaseParams) -> Result<MatrixBaseForm, MoyalError> {
    if cutoff == 0 {
        return Err(MoyalError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let dim = cutoff.pow(4);
    let rows = (0..dim)
        .map(|r| {
            let (m, n) = state_of(r, cutoff);
            let mut cands = vec![(n, m)];
            for q in 0..2 {
                for s in [-1i64, 1] {
                    let (mut k, mut l) = (n, m);
                    let (kq, lq) = (k[q] as i64 + s, l[q] as i64 + s);
                    if kq < 0 || lq < 0 || kq >= cutoff as i64 || lq >= cutoff as i64 {
                        continue;
                    }
                    k[q] = kq as usize;
                    l[q] = lq as usize;
                    cands.push((k, l));
                }
            }
            let mut row: Vec<(usize, f64)> = cands
                .into_iter()
                .map(|(k, l)| (state_index(k, l, cutoff), g_entry(m, n, k, l, params)))
                .filter(|&(_, v)| v != 0.0)
                .collect();
            row.sort_by_key(|&(c, _)| c);
            row
        })
        .collect();
    Ok(MatrixBaseForm { cutoff, params: *params, rows })
}

/// One chain of plane states `(m, n)` with fixed `m − n`, diagonalized.
#[derive(Clone, Debug)]
struct Chain {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Inverse of the truncated `G`. Writing `G = H·P` with `P` the swap
/// `(m, n) ↦ (n, m)`, `H` is a Kronecker sum of one tridiagonal operator per
/// plane plus `μ²`, so `G⁻¹ = P·H⁻¹` follows from per-chain eigendecompositions.
#[derive(Clone, Debug)]
pub struct TruncatedPropagator {
    pub cutoff: usize,
    pub params: MatrixBaseParams,
    chains: Vec<Chain>,
    /// For every plane state `(m, n)`: chain and position in it.
    place: Vec<(usize, usize)>,
    /// Largest over smallest modulus among the eigenvalues of `H`.
    pub condition: f64,
    /// Smallest eigenvalue of `H`; positive iff the form is positive on Hermitian fields.
    pub lowest: f64,
}

impl TruncatedPropagator {
    fn plane_state(&self, m: usize, n: usize) -> (usize, usize) {
        self.place[m * self.cutoff + n]
    }

    /// `H⁻¹` between full states `a = (a_m, a_n)` and `b`.
    fn h_inverse(&self, a: (Index2, Index2), b: (Index2, Index2)) -> f64 {
        let (ca1, pa1) = self.plane_state(a.0[0], a.1[0]);
        let (cb1, pb1) = self.plane_state(b.0[0], b.1[0]);
        let (ca2, pa2) = self.plane_state(a.0[1], a.1[1]);
        let (cb2, pb2) = self.plane_state(b.0[1], b.1[1]);
        if ca1 != cb1 || ca2 != cb2 {
            return 0.0;
        }
        let (c1, c2) = (&self.chains[ca1], &self.chains[ca2]);
        let mut acc = 0.0;
        for (x, &l1) in c1.values.iter().enumerate() {
            let w1 = c1.vectors[(pa1, x)] * c1.vectors[(pb1, x)];
            for (y, &l2) in c2.values.iter().enumerate() {
                acc += w1 * c2.vectors[(pa2, y)] * c2.vectors[(pb2, y)] / (l1 + l2 + self.params.mu2);
            }
        }
        acc
    }

    /// `C_{mn,kl}`, the inverse of `G` on the truncated basis.
    pub fn entry(&self, m: Index2, n: Index2, k: Index2, l: Index2) -> f64 {
        self.h_inverse((n, m), (k, l))
    }

    /// Column `(k, l)` of `C` as sparse `(row, value)` pairs.
    pub fn column(&self, k: Index2, l: Index2) -> Vec<(usize, f64)> {
        let c = self.cutoff;
        let mut out = Vec::new();
        let (c1, _) = self.plane_state(k[0], l[0]);
        let (c2, _) = self.plane_state(k[1], l[1]);
        let members = |chain: usize| -> Vec<(usize, usize)> {
            (0..c * c).filter(|&s| self.place[s].0 == chain).map(|s| (s / c, s % c)).collect()
        };
        for &(a1, b1) in &members(c1) {
            for &(a2, b2) in &members(c2) {
                let v = self.h_inverse(([a1, a2], [b1, b2]), (k, l));
                // C = P·H⁻¹: row (m, n) of C is row (n, m) of H⁻¹
                out.push((state_index([b1, b2], [a1, a2], c), v));
            }
        }
        out.sort_by_key(|&(r, _)| r);
        out
    }

    /// Frobenius norm of `G·C − Id` with `G` applied from its assembled rows.
    pub fn residual(&self, form: &MatrixBaseForm) -> f64 {
        let c = self.cutoff;
        let per_column: Vec<f64> = (0..form.dim())
            .into_par_iter()
            .map(|col| {
                let (k, l) = state_of(col, c);
                let x = self.column(k, l);
                let mut dense = vec![0.0; form.dim()];
                for (r, v) in &x {
                    dense[*r] = *v;
                }
                let mut touched: std::collections::BTreeSet<usize> =
                    x.iter().flat_map(|(r, _)| form.rows[*r].iter().map(|(c, _)| *c)).collect();
                touched.insert(col);
                let mut sum = 0.0;
                for row in touched {
                    let y: f64 = form.rows[row].iter().map(|(j, g)| g * dense[*j]).sum::<f64>() - if row == col { 1.0 } else { 0.0 };
                    sum += y * y;
                }
                sum
            })
            .collect();
        per_column.iter().sum::<f64>().sqrt()
    }
}

pub fn truncated_propagator(cutoff: usize, params: &MatrixBaseParams) -> Result<TruncatedPropagator, MoyalError> {
    if cutoff == 0 {
        return Err(MoyalError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let (a, b) = (2.0 * (1.0 + params.omega * params.omega) / params.theta, 2.0 * (1.0 - params.omega * params.omega) / params.theta);
    let c = cutoff as i64;
    let mut place = vec![(0, 0); cutoff * cutoff];
    let mut chains = Vec::new();
    for d in -(c - 1)..c {
        let states: Vec<(usize, usize)> = (0..cutoff).filter_map(|n| {
            let m = n as i64 + d;
            (0..c).contains(&m).then_some((m as usize, n))
        }).collect();
        let len = states.len();
        let k = DMatrix::from_fn(len, len, |i, j| {
            let (m, n) = states[i.min(j)];
            if i == j {
                a * (m + n) as f64
            } else if i.abs_diff(j) == 1 {
                -b * (((m + 1) * (n + 1)) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(k);
        for (pos, &(m, n)) in states.iter().enumerate() {
            place[m * cutoff + n] = (chains.len(), pos);
        }
        chains.push(Chain { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors });
    }
    let all: Vec<f64> = chains.iter().flat_map(|ch| ch.values.iter().copied()).collect();
    // eigenvalues of H are sums of one eigenvalue per plane plus μ²
    let lowest = 2.0 * all.iter().copied().fold(f64::INFINITY, f64::min) + params.mu2;
    let (mut smallest, mut largest) = (f64::INFINITY, 0.0f64);
    for &x in &all {
        for &y in &all {
            let h = (x + y + params.mu2).abs();
            smallest = smallest.min(h);
            largest = largest.max(h);
        }
    }
    if smallest <= 1e-12 * largest.max(1.0) {
        return Err(MoyalError::Singular { condition: largest / smallest });
    }
    Ok(TruncatedPropagator { cutoff, params: *params, chains, place, condition: largest / smallest, lowest })
}
