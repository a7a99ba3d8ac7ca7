//! Direct-space oscillation factors: vertex kernels, short/long variables,
//! the rosette left by the first Filk reduction and the planar vertex
//! contribution with its u → 0 limit.

mod phase;
mod rosette;

use thiserror::Error;

pub use phase::{moyal_kernel, vertex_factor, Lin, LineOrientation, PhaseForm, PhaseVar, VarKind};
pub use rosette::{filk_reduce, filk_reduce_ordered, moyality_limit, planar_vertex_contribution};

use crate::exact::Rational;
use crate::parametric::{corner_sign, line_signs};
use crate::ribbon::RibbonGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DirectError {
    #[error("expected an even number of corners (4 for a vertex), got {0}")]
    Arity(usize),
    #[error("tree does not span the graph")]
    NotSpanning,
    #[error("tree contains a loop line ({0})")]
    ContainsLoop(usize),
    #[error("line {0} listed twice")]
    DuplicateLine(usize),
    #[error("line {0} out of range")]
    LineIndex(usize),
    #[error("graph is not planar regular (g={g}, B={b})")]
    NotPlanarRegular { g: usize, b: usize },
    #[error("internal invariant failed: {0}")]
    Invariant(String),
}

/// Short/long change on one line: `√2 u = e_a x_a + e_b x_b`, `√2 v = x_a + x_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineChange {
    pub line: usize,
    pub a: usize,
    pub b: usize,
    /// Incidence signs `(−1)^{i+1}` of the two ends.
    pub eps: (i8, i8),
    /// Signs actually used; differ from `eps` only when both ends have the same parity.
    pub used: (i8, i8),
}

impl LineChange {
    /// `(√2·u, √2·v)` from the endpoint positions, exactly.
    pub fn scaled_uv(&self, xa: &[Rational; 4], xb: &[Rational; 4]) -> ([Rational; 4], [Rational; 4]) {
        let (ea, eb) = (Rational::from_integer(self.used.0.into()), Rational::from_integer(self.used.1.into()));
        let u = std::array::from_fn(|k| &ea * &xa[k] + &eb * &xb[k]);
        let v = std::array::from_fn(|k| &xa[k] + &xb[k]);
        (u, v)
    }

    /// Inverse of [`LineChange::scaled_uv`].
    pub fn endpoints(&self, su: &[Rational; 4], sv: &[Rational; 4]) -> ([Rational; 4], [Rational; 4]) {
        let (ea, eb) = (Rational::from_integer(self.used.0.into()), Rational::from_integer(self.used.1.into()));
        // e_a x_a + e_b x_b = su, x_a + x_b = sv with e_a = −e_b
        let xa: [Rational; 4] = std::array::from_fn(|k| (&su[k] - &eb * &sv[k]) / (&ea - &eb));
        let xb = std::array::from_fn(|k| &sv[k] - &xa[k]);
        (xa, xb)
    }

    pub fn uv(&self, xa: [f64; 4], xb: [f64; 4]) -> ([f64; 4], [f64; 4]) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (ea, eb) = (self.used.0 as f64, self.used.1 as f64);
        (std::array::from_fn(|k| r * (ea * xa[k] + eb * xb[k])), std::array::from_fn(|k| r * (xa[k] + xb[k])))
    }
}

pub fn short_long_change(g: &RibbonGraph) -> Vec<LineChange> {
    (0..g.n_lines())
        .map(|l| {
            let [a, b] = g.line(l);
            LineChange { line: l, a, b, eps: (corner_sign(a), corner_sign(b)), used: line_signs(g, l) }
        })
        .collect()
}
