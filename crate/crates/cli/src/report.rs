use std::fmt::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};

/// `x` with 12 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

fn complex(z: [f64; 2]) -> String {
    format!("{} {}i", num(z[0]), if z[1] < 0.0 { num(z[1]) } else { format!("+{}", num(z[1])) })
}

fn vector(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

fn lines_1(v: &[usize]) -> String {
    v.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}

pub trait Render: Serialize + DeserializeOwned {
    fn text(&self) -> String;
}

/// What every report carries besides its body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub report: T,
}

impl<T: Render> Envelope<T> {
    pub fn emit(&self) -> String {
        match self.config.format {
            Format::Machine => serde_json::to_string_pretty(self).expect("reports serialize") + "\n",
            Format::Text => format!("# ncphi4 {} seed={}\n{}", self.command, self.seed, self.report.text()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub n: usize,
    pub l: usize,
    pub ne: usize,
    pub f: usize,
    pub b: usize,
    pub g: usize,
    pub omega: i64,
    pub class: String,
}

impl Render for AnalyzeReport {
    fn text(&self) -> String {
        format!(
            "N={} L={} Ne={} F={} B={} g={} omega={} class={}\n",
            self.n, self.l, self.ne, self.f, self.b, self.g, self.omega, self.class
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLine {
    pub line: usize,
    pub tree: bool,
    pub head: String,
    pub tail: String,
    pub epsilon: i8,
}

/// A phase form with exact rational entries written as strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub vars: Vec<String>,
    pub delta: Vec<i64>,
    pub lines: Vec<PhaseLine>,
    /// Nonzero upper-triangle entries `(a, b, c_ab)`.
    pub entries: Vec<(String, String, String)>,
}

impl PhaseTable {
    fn text(&self) -> String {
        let delta: Vec<String> = self
            .vars
            .iter()
            .zip(&self.delta)
            .filter(|(_, &d)| d != 0)
            .map(|(v, &d)| format!("{}{}", if d > 0 { "+" } else { "-" }, v))
            .collect();
        let mut out = format!("delta: {}\n", if delta.is_empty() { "0".into() } else { delta.join(" ") });
        for l in &self.lines {
            writeln!(
                out,
                "line {}: {} head={} tail={} epsilon={:+}",
                l.line,
                if l.tree { "tree" } else { "loop" },
                l.head,
                l.tail,
                l.epsilon
            )
            .unwrap();
        }
        writeln!(out, "vars: {}", self.vars.join(" ")).unwrap();
        for (a, b, c) in &self.entries {
            writeln!(out, "{a} {b} {c}").unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosetteReport {
    /// Tree lines, 1-based.
    pub tree: Vec<usize>,
    pub spanning_trees: usize,
    pub form: PhaseTable,
    pub moyality: Option<PhaseTable>,
}

impl Render for RosetteReport {
    fn text(&self) -> String {
        let mut out = format!("tree: {} (of {} spanning trees)\n", lines_1(&self.tree), self.spanning_trees);
        out += &self.form.text();
        if let Some(m) = &self.moyality {
            out += "moyality limit:\n";
            out += &m.text();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuTerm {
    pub coefficient: String,
    pub s: u32,
    pub t: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuReport {
    pub variant: String,
    pub n_lines: usize,
    pub terms: Vec<HuTerm>,
}

impl Render for HuReport {
    fn text(&self) -> String {
        let mut out = format!("variant={} lines={} terms={}\n", self.variant, self.n_lines, self.terms.len());
        for term in &self.terms {
            write!(out, "{} s^{}", term.coefficient, term.s).unwrap();
            for (l, e) in term.t.iter().enumerate() {
                write!(out, " t{}^{e}", l + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeReport {
    pub dimension: f64,
    pub x_e: Vec<[f64; 4]>,
    pub p_root: [f64; 4],
    /// Set for a single integrand evaluation.
    pub t: Option<Vec<f64>>,
    pub hu: Option<f64>,
    pub hv_over_hu: Option<[f64; 2]>,
    /// Integrand at `t`, or the integral over the unit cube.
    pub value: [f64; 2],
    pub error: Option<f64>,
}

impl Render for AmplitudeReport {
    fn text(&self) -> String {
        let mut out = format!("D={}\n", num(self.dimension));
        for (i, x) in self.x_e.iter().enumerate() {
            writeln!(out, "x_{}={}", i + 1, vector(x)).unwrap();
        }
        writeln!(out, "p_root={}", vector(&self.p_root)).unwrap();
        match &self.t {
            Some(t) => {
                writeln!(out, "t={}", vector(t)).unwrap();
                writeln!(out, "HU={}", num(self.hu.unwrap_or(f64::NAN))).unwrap();
                writeln!(out, "HV/HU={}", complex(self.hv_over_hu.unwrap_or([f64::NAN; 2]))).unwrap();
                writeln!(out, "integrand={}", complex(self.value)).unwrap();
            }
            None => {
                writeln!(out, "amplitude={}", complex(self.value)).unwrap();
                writeln!(out, "error={}", num(self.error.unwrap_or(f64::NAN))).unwrap();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleRow {
    pub dimension: String,
    /// 1-based lines of the smallest slice with this pole.
    pub slice: Vec<usize>,
    pub b_prime: u32,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRow {
    pub i: usize,
    pub lines: Vec<usize>,
    pub n: usize,
    pub g: usize,
    pub b: usize,
    pub b_prime: u32,
    /// Topological bound, `None` outside the three cases.
    pub bound: Option<i64>,
    pub exact: bool,
    /// `e_i` at the configured dimension.
    pub exponent: String,
    pub first_pole: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorRow {
    pub order: Vec<usize>,
    pub steps: Vec<StepRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolesReport {
    pub n_lines: usize,
    pub class: Option<String>,
    pub superficial: Option<String>,
    pub superficially_divergent_at_4: bool,
    pub diverges_at_4: bool,
    pub poles: Vec<PoleRow>,
    pub sectors: Option<Vec<SectorRow>>,
}

impl Render for PolesReport {
    fn text(&self) -> String {
        let mut out = format!(
            "lines={} class={} superficial={} superficially_divergent_at_4={} diverges_at_4={}\n",
            self.n_lines,
            self.class.as_deref().unwrap_or("-"),
            self.superficial.as_deref().unwrap_or("none"),
            self.superficially_divergent_at_4,
            self.diverges_at_4
        );
        for p in &self.poles {
            writeln!(out, "pole D={} slice={} b'={} multiplicity={}", p.dimension, lines_1(&p.slice), p.b_prime, p.multiplicity).unwrap();
        }
        for s in self.sectors.iter().flatten() {
            writeln!(out, "sector {}", lines_1(&s.order)).unwrap();
            for st in &s.steps {
                writeln!(
                    out,
                    "  i={} lines={} n={} g={} B={} b'={} bound={}{} e={} D*={}",
                    st.i,
                    lines_1(&st.lines),
                    st.n,
                    st.g,
                    st.b,
                    st.b_prime,
                    st.bound.map_or("-".into(), |b| b.to_string()),
                    if st.exact { " (exact)" } else { "" },
                    st.exponent,
                    st.first_pole.as_deref().unwrap_or("inf")
                )
                .unwrap();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactRow {
    pub rho: f64,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactcheckReport {
    pub subgraph: Vec<usize>,
    pub dimension: f64,
    pub quotient: String,
    pub constant: String,
    pub b_prime: u32,
    pub x_e: Vec<[f64; 4]>,
    pub t_s: Vec<f64>,
    pub t_rest: Vec<f64>,
    pub rows: Vec<FactRow>,
    pub slope: Option<f64>,
    pub diagnostic: Option<String>,
}

impl Render for FactcheckReport {
    fn text(&self) -> String {
        let mut out = format!("subgraph={} D={} c={} b'={}\n", lines_1(&self.subgraph), num(self.dimension), self.constant, self.b_prime);
        for (i, x) in self.x_e.iter().enumerate() {
            writeln!(out, "x_{}={}", i + 1, vector(x)).unwrap();
        }
        writeln!(out, "t_S={}\nt_rest={}", vector(&self.t_s), vector(&self.t_rest)).unwrap();
        out += "quotient:\n";
        for l in self.quotient.lines() {
            writeln!(out, "  {l}").unwrap();
        }
        for r in &self.rows {
            writeln!(out, "rho={} lhs={} rhs={} deviation={}", num(r.rho), complex(r.lhs), complex(r.rhs), num(r.deviation)).unwrap();
        }
        match self.slope {
            Some(s) => writeln!(out, "slope={}", num(s)).unwrap(),
            None => writeln!(out, "slope=none ({})", self.diagnostic.as_deref().unwrap_or("")).unwrap(),
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorPoleRow {
    pub order: Vec<usize>,
    pub step: usize,
    pub residue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubtractReport {
    pub subgraph: Vec<usize>,
    pub points: Vec<(f64, f64)>,
    pub c_minus1: f64,
    pub c0: f64,
    pub c1: f64,
    pub fit_residual: f64,
    pub subtracted: f64,
    pub residue: f64,
    pub sector_poles: Vec<SectorPoleRow>,
}

impl Render for SubtractReport {
    fn text(&self) -> String {
        let mut out = format!("subgraph={}\n", lines_1(&self.subgraph));
        for (d, a) in &self.points {
            writeln!(out, "D={} A={}", num(*d), num(*a)).unwrap();
        }
        writeln!(out, "fit c_-1={} c_0={} c_1={} residual={}", num(self.c_minus1), num(self.c0), num(self.c1), num(self.fit_residual)).unwrap();
        writeln!(out, "subtracted c_0={} residue c_-1={}", num(self.subtracted), num(self.residue)).unwrap();
        for s in &self.sector_poles {
            writeln!(out, "sector {} step={} residue={}", lines_1(&s.order), s.step, num(s.residue)).unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    pub at: [f64; 4],
    pub value: [f64; 2],
    pub error: f64,
    pub closed_form: bool,
}

impl Render for StarReport {
    fn text(&self) -> String {
        format!(
            "x={}\n(f*g)(x)={}\nerror={} closed_form={}\n",
            vector(&self.at),
            complex(self.value),
            num(self.error),
            self.closed_form
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub slice: u32,
    pub constant: f64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorReport {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub value: f64,
    pub error: f64,
    pub m: f64,
    pub slices: Vec<SliceRow>,
    pub uniform: Option<bool>,
}

impl Render for PropagatorReport {
    fn text(&self) -> String {
        let mut out = format!("x={}\ny={}\nC(x,y)={} error={}\n", vector(&self.x), vector(&self.y), num(self.value), num(self.error));
        for s in &self.slices {
            writeln!(out, "slice {} M={} K={} k={}", s.slice, num(self.m), num(s.constant), num(s.rate)).unwrap();
        }
        if let Some(u) = self.uniform {
            writeln!(out, "uniform={u}").unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRow {
    pub m: [usize; 2],
    pub n: [usize; 2],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixbaseReport {
    pub cutoff: usize,
    pub dim: usize,
    pub residual: f64,
    pub condition: f64,
    pub lowest: f64,
    /// `C_{mn,nm}` for indices below 2 in each plane.
    pub entries: Vec<EntryRow>,
}

impl Render for MatrixbaseReport {
    fn text(&self) -> String {
        let mut out = format!(
            "cutoff={} dim={} residual={} condition={} lowest={}\n",
            self.cutoff,
            self.dim,
            num(self.residual),
            num(self.condition),
            num(self.lowest)
        );
        for e in &self.entries {
            writeln!(out, "C[({},{}),({},{});({},{}),({},{})]={}", e.m[0], e.m[1], e.n[0], e.n[1], e.n[0], e.n[1], e.m[0], e.m[1], num(e.value))
                .unwrap();
        }
        out
    }
}
