//! Exact rational linear algebra: determinants, Pfaffians, nullspaces.
//!
//! Eliminations first run on `Ratio<i128>` with checked arithmetic and redo the
//! work on `BigRational` if anything overflows.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Field operations that may fail on overflow.
trait Field: Clone + PartialEq + Zero + One {
    fn sub_(&self, o: &Self) -> Option<Self>;
    fn mul_(&self, o: &Self) -> Option<Self>;
    fn div_(&self, o: &Self) -> Option<Self>;
}

type Small = Ratio<i128>;

impl Field for Small {
    fn sub_(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul_(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div_(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
}

impl Field for Rational {
    fn sub_(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul_(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
}

fn to_small(m: &[Vec<Rational>]) -> Option<Vec<Vec<Small>>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|x| Some(Small::new_raw(x.numer().to_i128()?, x.denom().to_i128()?)))
                .collect()
        })
        .collect()
}

fn from_small(x: Small) -> Rational {
    Rational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn det_in<T: Field>(mut a: Vec<Vec<T>>) -> Option<T> {
    let n = a.len();
    let mut det = T::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Some(T::zero());
        };
        if p != k {
            a.swap(p, k);
            det = T::zero().sub_(&det)?;
        }
        let piv = a[k][k].clone();
        det = det.mul_(&piv)?;
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].div_(&piv)?;
            for c in k..n {
                let v = a[r][c].sub_(&f.mul_(&a[k][c])?)?;
                a[r][c] = v;
            }
        }
    }
    Some(det)
}

pub fn det(m: &[Vec<Rational>]) -> Rational {
    if let Some(d) = to_small(m).and_then(det_in) {
        return from_small(d);
    }
    det_in(m.to_vec()).expect("big rationals do not overflow")
}

/// Pfaffian by congruence elimination; the matrix must be antisymmetric.
fn pfaffian_in<T: Field>(mut a: Vec<Vec<T>>) -> Option<T> {
    let n = a.len();
    if n % 2 == 1 {
        return Some(T::zero());
    }
    let mut pf = T::one();
    for k in (0..n).step_by(2) {
        let Some(p) = (k + 1..n).find(|&j| !a[k][j].is_zero()) else {
            return Some(T::zero());
        };
        if p != k + 1 {
            a.swap(p, k + 1);
            for row in a.iter_mut() {
                row.swap(p, k + 1);
            }
            pf = T::zero().sub_(&pf)?;
        }
        let piv = a[k][k + 1].clone();
        pf = pf.mul_(&piv)?;
        // clear row/column k against k+1, then row/column k+1 against k
        for (src, dst_col) in [(k + 1, k), (k, k + 1)] {
            let pv = a[dst_col][src].clone();
            for i in k + 2..n {
                if a[dst_col][i].is_zero() {
                    continue;
                }
                let f = a[dst_col][i].div_(&pv)?;
                for r in 0..n {
                    let v = a[r][i].sub_(&f.mul_(&a[r][src])?)?;
                    a[r][i] = v;
                }
                for c in 0..n {
                    let v = a[i][c].sub_(&f.mul_(&a[src][c])?)?;
                    a[i][c] = v;
                }
            }
        }
    }
    Some(pf)
}

pub fn pfaffian(m: &[Vec<Rational>]) -> Rational {
    if let Some(d) = to_small(m).and_then(pfaffian_in) {
        return from_small(d);
    }
    pfaffian_in(m.to_vec()).expect("big rationals do not overflow")
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(a: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let v = &f * &a[r][j];
                    a[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    rref(&mut m.to_vec()).len()
}

/// Basis of `{x : m x = 0}` for a matrix with `cols` columns.
pub fn nullspace(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); cols];
            x[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -a[r][f].clone();
            }
            x
        })
        .collect()
}

/// Solves `m x = b` for square nonsingular `m`.
pub fn solve(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    let pivots = rref(&mut a);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}
