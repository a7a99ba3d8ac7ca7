use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{q, to_f64, Rational};
use crate::ribbon::RibbonGraph;

/// Incidence matrices: row per line, column per half-edge `4V + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidencePair {
    pub eps: Vec<Vec<i8>>,
    pub eta: Vec<Vec<i8>>,
}

/// `(−1)^{i+1}` for corner `i` numbered from 1, i.e. `+1` on corners 0 and 2 here.
pub fn corner_sign(h: usize) -> i8 {
    if h % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn incidence(g: &RibbonGraph) -> IncidencePair {
    let h = g.n_half_edges();
    let mut eps = vec![vec![0i8; h]; g.n_lines()];
    for (l, row) in eps.iter_mut().enumerate() {
        for x in g.line(l) {
            row[x] = corner_sign(x);
        }
    }
    let eta = eps.iter().map(|r| r.iter().map(|e| e.abs()).collect()).collect();
    IncidencePair { eps, eta }
}

/// Signs `(e_a, e_b)` with which the two ends of a line enter its short
/// variable. Equal to the incidence signs when they differ; a line joining two
/// corners of equal parity gets `(+1, −1)` so that `(u, v)` stays invertible.
pub fn line_signs(g: &RibbonGraph, l: usize) -> (i8, i8) {
    let [a, b] = g.line(l);
    let (ea, eb) = (corner_sign(a), corner_sign(b));
    if ea != eb {
        (ea, eb)
    } else {
        (1, -1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HuVariant {
    /// Externals held fixed, root delta replaced by the hypermomentum source.
    Amputated,
    /// Externals integrated with unit Gaussian weight, every vertex delta integrated.
    Smeared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormVar {
    U(usize),
    V(usize),
    /// Fourier variable of a vertex delta.
    R(usize),
    /// External position divided by √2.
    Y(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diag {
    InvT(usize),
    T(usize),
    One,
    Zero,
}

/// Quadratic form `z†(S + C)z` of one symplectic block. `S` is diagonal,
/// `C = s·C_s + C_0` is real antisymmetric.
#[derive(Clone, Debug)]
pub struct GaussianForm {
    pub variant: HuVariant,
    pub vars: Vec<FormVar>,
    pub n_internal: usize,
    pub n_lines: usize,
    pub diag: Vec<Diag>,
    pub c_s: Vec<Vec<Rational>>,
    pub c_0: Vec<Vec<Rational>>,
}

impl GaussianForm {
    pub fn new(g: &RibbonGraph, variant: HuVariant) -> Self {
        let nl = g.n_lines();
        let mut vars: Vec<FormVar> = (0..nl).map(FormVar::U).chain((0..nl).map(FormVar::V)).collect();
        let root = g.root();
        vars.extend((0..g.n_vertices()).filter(|&v| v != root).map(FormVar::R));
        let tail: Vec<FormVar> = g.externals().iter().map(|&h| FormVar::Y(h)).chain([FormVar::R(root)]).collect();
        let n_internal = match variant {
            HuVariant::Amputated => vars.len(),
            HuVariant::Smeared => vars.len() + tail.len(),
        };
        vars.extend(tail);
        let n = vars.len();
        let diag = vars
            .iter()
            .enumerate()
            .map(|(i, v)| match *v {
                FormVar::U(l) => Diag::InvT(l),
                FormVar::V(l) => Diag::T(l),
                FormVar::Y(_) if i < n_internal => Diag::One,
                _ => Diag::Zero,
            })
            .collect();
        let index = |v: FormVar| vars.iter().position(|&w| w == v).expect("variable present");

        // corner positions as combinations of basis variables, in units where
        // internal corners are (v ± u)/√2 and externals are √2·y; products of two
        // such coefficients are rational.
        #[derive(Clone, Copy)]
        enum Pos {
            Line { u: usize, v: usize, e: i8 },
            Ext(usize),
        }
        let mut pos = vec![None; g.n_half_edges()];
        for l in 0..nl {
            let [a, b] = g.line(l);
            let (ea, eb) = line_signs(g, l);
            let (u, v) = (index(FormVar::U(l)), index(FormVar::V(l)));
            pos[a] = Some(Pos::Line { u, v, e: ea });
            pos[b] = Some(Pos::Line { u, v, e: eb });
        }
        for &h in g.externals() {
            pos[h] = Some(Pos::Ext(index(FormVar::Y(h))));
        }
        // (index, coefficient × √2) for a corner
        let terms = |p: Pos| -> Vec<(usize, Rational)> {
            match p {
                Pos::Line { u, v, e } => vec![(v, Rational::one()), (u, q(e as i64, 1))],
                Pos::Ext(y) => vec![(y, q(2, 1))],
            }
        };
        let mut c_s = vec![vec![Rational::zero(); n]; n];
        let mut c_0 = vec![vec![Rational::zero(); n]; n];
        let add = |m: &mut Vec<Vec<Rational>>, a: usize, b: usize, k: Rational| {
            if a != b {
                m[a][b] += &k;
                m[b][a] -= &k;
            }
        };
        for v in 0..g.n_vertices() {
            let corners: Vec<Pos> = (0..4).map(|i| pos[4 * v + i].expect("corner assigned")).collect();
            for i in 0..4 {
                for j in i + 1..4 {
                    // i·2s(−1)^{i+j+1} x_i σ x_j with 1-based corners; C gets half
                    let sign = if (i + j) % 2 == 0 { -1 } else { 1 };
                    for (a, ca) in terms(corners[i]) {
                        for (b, cb) in terms(corners[j]) {
                            // ca·cb carries a factor 2 from the two √2's
                            add(&mut c_s, a, b, q(sign, 2) * &ca * &cb);
                        }
                    }
                }
            }
            // −i q_V σ X_V with q = √2 r, X_V = Σ (−1)^{i+1} x_i
            let r = index(FormVar::R(v));
            for (i, &corner) in corners.iter().enumerate() {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                for (a, ca) in terms(corner) {
                    add(&mut c_0, r, a, q(-sign, 2) * &ca);
                }
            }
        }
        GaussianForm { variant, vars, n_internal, n_lines: nl, diag, c_s, c_0 }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    fn diag_value<T: Clone>(&self, i: usize, t: &[T], one: T, zero: T, inv: impl Fn(&T) -> T) -> T {
        match self.diag[i] {
            Diag::InvT(l) => inv(&t[l]),
            Diag::T(l) => t[l].clone(),
            Diag::One => one,
            Diag::Zero => zero,
        }
    }

    /// Exact `S + C` at rational parameters.
    pub fn eval_exact(&self, t: &[Rational], s: &Rational) -> Vec<Vec<Rational>> {
        let n = self.len();
        let mut m = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = s * &self.c_s[i][j] + &self.c_0[i][j];
            }
            m[i][i] += self.diag_value(i, t, Rational::one(), Rational::zero(), |x| x.recip());
        }
        m
    }

    /// Floating `S + C`.
    pub fn eval(&self, t: &[f64], s: f64) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            let c = s * to_f64(&self.c_s[i][j]) + to_f64(&self.c_0[i][j]);
            if i == j {
                c + self.diag_value(i, t, 1.0, 0.0, |x| 1.0 / x)
            } else {
                c
            }
        })
    }

    /// Hermitian part (the diagonal S) and anti-Hermitian phase part (C) of the
    /// complex form at real parameters.
    pub fn hermitian_split(&self, t: &[f64], s: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let m = self.eval(t, s).map(|x| Complex64::new(x, 0.0));
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let a = (&m - m.adjoint()) * Complex64::new(0.5, 0.0);
        (h, a)
    }
}
