use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::DirectError;
use crate::exact::{qi, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    /// A corner or external position.
    Position,
    Short(usize),
    /// Long variable of a tree line.
    Long(usize),
    /// Long variable of a loop line.
    LoopLong(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseVar {
    pub name: String,
    pub kind: VarKind,
}

impl PhaseVar {
    pub fn position(name: &str) -> Self {
        PhaseVar { name: name.to_string(), kind: VarKind::Position }
    }
}

/// How the short and long variables of a line are defined:
/// `u = x_head − x_tail`, long `= x_head + x_tail`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineOrientation {
    pub line: usize,
    pub head: String,
    pub tail: String,
    pub epsilon: i8,
    pub tree: bool,
}

/// Exponent `i Σ_{a<b} c_ab X_a θ⁻¹ X_b` with `c` stored as a full antisymmetric
/// matrix, together with one delta constraint `Σ δ_a X_a = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseForm {
    pub vars: Vec<PhaseVar>,
    pub matrix: Vec<Vec<Rational>>,
    pub delta: Vec<i64>,
    pub lines: Vec<LineOrientation>,
}

/// Linear combination of basis variables.
pub type Lin = Vec<Rational>;

impl PhaseForm {
    pub fn zero(vars: Vec<PhaseVar>) -> Self {
        let n = vars.len();
        PhaseForm { vars, matrix: vec![vec![Rational::zero(); n]; n], delta: vec![0; n], lines: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn basis(&self, i: usize) -> Lin {
        let mut x = vec![Rational::zero(); self.len()];
        x[i] = qi(1);
        x
    }

    /// Adds `k · A ∧ B`.
    pub fn add_wedge(&mut self, a: &Lin, b: &Lin, k: &Rational) {
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() || i == j {
                    continue;
                }
                let c = k * ai * bj;
                self.matrix[i][j] += &c;
                self.matrix[j][i] -= c;
            }
        }
    }

    /// Adds `k Σ_{i<j} y_i ∧ y_j` over an ordered item list.
    pub fn add_ordered_pairs(&mut self, items: &[Lin], k: &Rational) {
        let mut prefix = vec![Rational::zero(); self.len()];
        for y in items {
            self.add_wedge(&prefix, y, k);
            for (p, v) in prefix.iter_mut().zip(y) {
                *p += v;
            }
        }
    }

    pub fn entry(&self, a: &str, b: &str) -> Option<Rational> {
        Some(self.matrix[self.index(a)?][self.index(b)?].clone())
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| (&self.matrix[i][j] + &self.matrix[j][i]).is_zero()))
    }

    pub fn delta_lin(&self) -> Lin {
        self.delta.iter().map(|&d| qi(d)).collect()
    }

    pub(crate) fn set_delta(&mut self, lin: &Lin) -> Result<(), DirectError> {
        self.delta = lin
            .iter()
            .map(|c| {
                if c.is_integer() && c.abs() <= qi(1) {
                    Ok(c.to_integer().try_into().expect("small integer"))
                } else {
                    Err(DirectError::Invariant(format!("delta coefficient {c} outside {{-1, 0, 1}}")))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    /// Same form with the delta constraint negated, which is the same distribution.
    pub fn with_negated_delta(&self) -> Self {
        let mut f = self.clone();
        f.delta.iter_mut().for_each(|d| *d = -*d);
        f
    }

    /// Delta constraint and upper triangle of the matrix as an exact table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let delta: Vec<String> = self
            .vars
            .iter()
            .zip(&self.delta)
            .filter(|(_, &d)| d != 0)
            .map(|(v, &d)| format!("{}{}", if d > 0 { "+" } else { "-" }, v.name))
            .collect();
        writeln!(out, "delta: {}", if delta.is_empty() { "0".into() } else { delta.join(" ") }).unwrap();
        for l in &self.lines {
            writeln!(
                out,
                "line {}: {} head={} tail={} epsilon={:+}",
                l.line + 1,
                if l.tree { "tree" } else { "loop" },
                l.head,
                l.tail,
                l.epsilon
            )
            .unwrap();
        }
        writeln!(out, "vars: {}", self.vars.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(" ")).unwrap();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let c = &self.matrix[i][j];
                if !c.is_zero() {
                    writeln!(out, "{} {} {}", self.vars[i].name, self.vars[j].name, c).unwrap();
                }
            }
        }
        out
    }
}

/// The Moyal kernel on `2n` cyclically ordered positions: delta on the
/// alternating sum, phase `2(−1)^{i+j+1}` for `i < j` (1-based).
pub fn moyal_kernel(names: &[&str]) -> Result<PhaseForm, DirectError> {
    if names.is_empty() || names.len() % 2 == 1 {
        return Err(DirectError::Arity(names.len()));
    }
    let mut vars: Vec<PhaseVar> = Vec::new();
    for n in names {
        if !vars.iter().any(|v| v.name == *n) {
            vars.push(PhaseVar::position(n));
        }
    }
    let mut f = PhaseForm::zero(vars);
    let items: Vec<Lin> = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mut x = f.basis(f.index(n).unwrap());
            if i % 2 == 1 {
                x.iter_mut().for_each(|c| *c = -c.clone());
            }
            x
        })
        .collect();
    // with y_i = (−1)^{i+1} x_i the phase is −2 Σ_{i<j} y_i ∧ y_j
    f.add_ordered_pairs(&items, &qi(-2));
    let mut delta = vec![Rational::zero(); f.len()];
    for y in &items {
        for (d, c) in delta.iter_mut().zip(y) {
            *d += c;
        }
    }
    f.delta = delta.iter().map(|c| c.to_integer().try_into().expect("small")).collect();
    Ok(f)
}

/// The φ⁴ vertex `δ(x₁ − x₂ + x₃ − x₄) e^{2i Σ_{i<j} (−1)^{i+j+1} x_i θ⁻¹ x_j}`.
pub fn vertex_factor(corners: &[&str]) -> Result<PhaseForm, DirectError> {
    if corners.len() != 4 {
        return Err(DirectError::Arity(corners.len()));
    }
    moyal_kernel(corners)
}
