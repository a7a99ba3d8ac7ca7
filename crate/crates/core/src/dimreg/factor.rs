use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::DimregError;
use crate::exact::Rational;
use crate::parametric::{hu_extract, hv_over_hu, AmplitudeInput, GaussianForm, HuPolynomial, HuVariant, Monomial};
use crate::ribbon::{subgraph_slice, GraphSpec, RibbonGraph, VertexSpec};

fn check_lines(g: &RibbonGraph, lines: &[usize]) -> Result<(), DimregError> {
    let set: BTreeSet<usize> = lines.iter().copied().collect();
    if lines.is_empty() || set.len() != lines.len() || set.iter().any(|&l| l >= g.n_lines()) {
        return Err(DimregError::Subgraph(format!("bad line set {lines:?}")));
    }
    Ok(())
}

fn vertices_of(g: &RibbonGraph, lines: &[usize]) -> BTreeSet<usize> {
    lines.iter().flat_map(|&l| g.line(l).map(|h| h / 4)).collect()
}

/// The subgraph spanned by `lines` as a graph on its own: corners of its
/// vertices outside the line set become externals.
pub fn subgraph_graph(g: &RibbonGraph, lines: &[usize]) -> Result<RibbonGraph, DimregError> {
    check_lines(g, lines)?;
    let vs = vertices_of(g, lines);
    let active: BTreeSet<usize> = lines.iter().flat_map(|&l| g.line(l)).collect();
    let name = |h: usize| g.half_edge_name(h).to_string();
    let spec = GraphSpec {
        root: g.vertex_id(if vs.contains(&g.root()) { g.root() } else { *vs.first().unwrap() }).to_string(),
        externals: vs.iter().flat_map(|&v| 4 * v..4 * v + 4).filter(|h| !active.contains(h)).map(name).collect(),
        lines: lines.iter().map(|&l| g.line(l).iter().map(|&h| name(h)).collect()).collect(),
        vertices: vs
            .iter()
            .map(|&v| VertexSpec { id: g.vertex_id(v).to_string(), corners: (4 * v..4 * v + 4).map(name).collect() })
            .collect(),
    };
    Ok(RibbonGraph::build(&spec)?)
}

/// Corners of the slice's vertices outside the slice, in the order the unique
/// broken face passes them, rotated to start at the smallest half-edge.
pub fn broken_face_corners(g: &RibbonGraph, lines: &[usize]) -> Result<Vec<usize>, DimregError> {
    check_lines(g, lines)?;
    let mut active = vec![false; g.n_half_edges()];
    for &l in lines {
        for h in g.line(l) {
            active[h] = true;
        }
    }
    let mut visited = vec![false; g.n_half_edges()];
    let mut broken = Vec::new();
    for start in 0..g.n_half_edges() {
        if !active[start] || visited[start] {
            continue;
        }
        let mut corners = Vec::new();
        let mut h = start;
        loop {
            visited[h] = true;
            let a = g.partner(h).expect("active half-edges are paired");
            let base = a - a % 4;
            let mut k = 1;
            h = loop {
                let x = base + (a % 4 + k) % 4;
                if active[x] {
                    break x;
                }
                corners.push(x);
                k += 1;
            };
            if h == start {
                break;
            }
        }
        if !corners.is_empty() {
            broken.push(corners);
        }
    }
    if broken.len() != 1 {
        return Err(DimregError::Subgraph(format!("{} broken faces, expected one", broken.len())));
    }
    let mut corners = broken.pop().unwrap();
    let first = (0..corners.len()).min_by_key(|&i| corners[i]).unwrap();
    corners.rotate_left(first);
    Ok(corners)
}

/// `G/S`: a connected planar regular four-point slice contracted to one
/// vertex whose corners follow its broken face.
pub fn quotient_graph(g: &RibbonGraph, lines: &[usize]) -> Result<RibbonGraph, DimregError> {
    let slice = subgraph_slice(g, lines)?;
    if slice.c != 1 || slice.g != 0 || slice.b != 1 {
        return Err(DimregError::Subgraph(format!("not planar regular and connected (c={}, g={}, B={})", slice.c, slice.g, slice.b)));
    }
    let vs = vertices_of(g, lines);
    if vs.contains(&g.root()) {
        // the root delta is not enforced, so its corners are not cyclically equivalent
        return Err(DimregError::Subgraph("the root vertex lies in the subgraph".into()));
    }
    let corners = broken_face_corners(g, lines)?;
    if corners.len() != 4 {
        return Err(DimregError::Subgraph(format!("{} external corners, a vertex needs 4", corners.len())));
    }
    let id = format!("[{}]", vs.iter().map(|&v| g.vertex_id(v)).collect::<Vec<_>>().join("+"));
    let spec = g.to_spec();
    let in_s: BTreeSet<usize> = lines.iter().copied().collect();
    let first = *vs.first().unwrap();
    let mut vertices = Vec::new();
    for (v, vs_spec) in spec.vertices.into_iter().enumerate() {
        if v == first {
            vertices.push(VertexSpec { id: id.clone(), corners: corners.iter().map(|&h| g.half_edge_name(h).to_string()).collect() });
        } else if !vs.contains(&v) {
            vertices.push(vs_spec);
        }
    }
    let quotient = GraphSpec {
        root: spec.root,
        externals: spec.externals,
        lines: spec.lines.into_iter().enumerate().filter(|(l, _)| !in_s.contains(l)).map(|(_, p)| p).collect(),
        vertices,
    };
    Ok(RibbonGraph::build(&quotient)?)
}

/// Line `k` of a derived graph as a line of `g`, matched by half-edge names.
fn line_map(g: &RibbonGraph, h: &RibbonGraph) -> Result<Vec<usize>, DimregError> {
    (0..h.n_lines())
        .map(|k| {
            let name = h.half_edge_name(h.line(k)[0]);
            g.half_edge_index(name)
                .and_then(|x| g.line_of(x))
                .ok_or_else(|| DimregError::Subgraph(format!("half-edge {name} is not on a line of the graph")))
        })
        .collect()
}

/// `HU_G` restricted to its lowest degree in the lines of `S` equals
/// `c · HU_S^lead · HU_{G/S}` exactly, with `HU_S^lead` the lowest total
/// degree part of `HU_S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadingFactorization {
    pub constant: Rational,
    pub b_prime: u32,
    pub s_leading: HuPolynomial,
    pub s_lines: Vec<usize>,
}

pub fn leading_factorization(g: &RibbonGraph, lines: &[usize], quotient: &RibbonGraph) -> Result<LeadingFactorization, DimregError> {
    let sub = subgraph_graph(g, lines)?;
    let hu_g = hu_extract(g)?;
    let hu_s = hu_extract(&sub)?;
    let hu_q = hu_extract(quotient)?;
    let q_map = line_map(g, quotient)?;
    if lines.len() + q_map.len() != g.n_lines() || q_map.iter().any(|l| lines.contains(l)) {
        return Err(DimregError::Subgraph("quotient lines do not complement the subgraph".into()));
    }
    let b = hu_g.min_degree_on(lines);
    let lead_g: BTreeMap<&Monomial, &Rational> = hu_g.terms.iter().filter(|(m, _)| m.degree_on(lines) == b).collect();
    let min_s = hu_s.terms.keys().map(Monomial::degree).min().unwrap_or(0);
    if min_s != b {
        return Err(DimregError::Factorization(format!("lowest degree of HU_S is {min_s}, HU_G has {b} on S")));
    }
    let s_terms: BTreeMap<Monomial, Rational> =
        hu_s.terms.iter().filter(|(m, _)| m.degree() == b).map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut product: BTreeMap<Monomial, Rational> = BTreeMap::new();
    for (ms, cs) in &s_terms {
        for (mq, cq) in &hu_q.terms {
            let mut t = vec![0u8; g.n_lines()];
            for (k, &l) in lines.iter().enumerate() {
                t[l] = ms.t[k];
            }
            for (k, &l) in q_map.iter().enumerate() {
                t[l] = mq.t[k];
            }
            *product.entry(Monomial { t, s: ms.s + mq.s }).or_insert_with(Rational::zero) += cs * cq;
        }
    }
    product.retain(|_, c| !c.is_zero());
    let keys_g: Vec<&Monomial> = lead_g.keys().copied().collect();
    let keys_p: Vec<&Monomial> = product.keys().collect();
    if keys_g != keys_p {
        let only_g = keys_g.iter().filter(|m| !product.contains_key(**m)).count();
        let only_p = keys_p.iter().filter(|m| !lead_g.contains_key(*m)).count();
        return Err(DimregError::Factorization(format!("{only_g} monomials only in HU_G, {only_p} only in the product")));
    }
    let (m0, p0) = product.iter().next().ok_or_else(|| DimregError::Factorization("empty product".into()))?;
    let constant = lead_g[m0] / p0;
    if let Some((m, _)) = product.iter().find(|(m, c)| &(&constant * *c) != lead_g[m]) {
        return Err(DimregError::Factorization(format!("coefficient ratio differs at {m:?}")));
    }
    let s_leading = HuPolynomial { n_lines: lines.len(), variant: hu_s.variant, terms: s_terms, normalization: hu_s.normalization };
    Ok(LeadingFactorization { constant, b_prime: b, s_leading, s_lines: lines.to_vec() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationInput {
    pub dimension: f64,
    pub theta: f64,
    pub omega: f64,
    /// External positions in the order of `g.externals()`.
    pub x_e: Vec<[f64; 4]>,
    /// Parameters of the subgraph lines, in the order the lines are given.
    pub t_s: Vec<f64>,
    /// Parameters of the remaining lines, in graph order.
    pub t_rest: Vec<f64>,
    pub rhos: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationRow {
    pub rho: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|LHS/RHS − 1|`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub leading: LeadingFactorization,
    pub rows: Vec<FactorizationRow>,
    /// Least-squares slope of `log deviation` against `log ρ` on the last four rows.
    pub slope: Option<f64>,
    pub diagnostic: Option<String>,
}

/// Least-squares slope through `(x, y)`.
pub(crate) fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let sxy: f64 = points.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|&(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Both sides of the factorization of `e^{−HV/HU}/HU^{D/2}` with the subgraph
/// parameters scaled `t_S → ρ² t_S` (the sector variables of `S` scale by ρ).
pub fn factorization_check(
    g: &RibbonGraph,
    lines: &[usize],
    quotient: &RibbonGraph,
    input: &FactorizationInput,
) -> Result<FactorizationReport, DimregError> {
    let leading = leading_factorization(g, lines, quotient)?;
    let rest: Vec<usize> = (0..g.n_lines()).filter(|l| !lines.contains(l)).collect();
    if input.t_s.len() != lines.len() || input.t_rest.len() != rest.len() {
        return Err(DimregError::Subgraph("parameter counts do not match the line sets".into()));
    }
    let hu_g = hu_extract(g)?;
    let hu_q = hu_extract(quotient)?;
    let form_g = GaussianForm::new(g, HuVariant::Amputated);
    let form_q = GaussianForm::new(quotient, HuVariant::Amputated);
    let amp = |x_e: Vec<[f64; 4]>| AmplitudeInput {
        x_e,
        p_root: [0.0; 4],
        dimension: input.dimension,
        theta: input.theta,
        omega: input.omega,
    };
    let in_g = amp(input.x_e.clone());
    let x_q = quotient
        .externals()
        .iter()
        .map(|&h| {
            let name = quotient.half_edge_name(h);
            g.externals()
                .iter()
                .position(|&x| g.half_edge_name(x) == name)
                .and_then(|k| input.x_e.get(k).copied())
                .ok_or_else(|| DimregError::Subgraph(format!("external {name} of the quotient has no position")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let in_q = amp(x_q);
    let s = in_g.s();
    let half_d = input.dimension / 2.0;
    let q_map = line_map(g, quotient)?;
    let t_q: Vec<f64> = q_map.iter().map(|l| input.t_rest[rest.iter().position(|r| r == l).unwrap()]).collect();
    let hv_q = hv_over_hu(&form_q, &t_q, &in_q)?;
    let hu_q_val = hu_q.eval(&t_q, s);
    let c = crate::exact::to_f64(&leading.constant);
    let mut rows = Vec::new();
    for &rho in &input.rhos {
        let mut t = vec![0.0; g.n_lines()];
        let ts: Vec<f64> = input.t_s.iter().map(|x| rho * rho * x).collect();
        for (k, &l) in lines.iter().enumerate() {
            t[l] = ts[k];
        }
        for (k, &l) in rest.iter().enumerate() {
            t[l] = input.t_rest[k];
        }
        let hv = hv_over_hu(&form_g, &t, &in_g)?;
        let lhs = (-hv).exp() / hu_g.eval(&t, s).powf(half_d);
        let rhs = (-hv_q).exp() / (c * leading.s_leading.eval(&ts, s) * hu_q_val).powf(half_d);
        rows.push(FactorizationRow { rho, lhs, rhs, deviation: (lhs / rhs - 1.0).norm() });
    }
    let tail: Vec<&FactorizationRow> = rows.iter().rev().take(4).rev().collect();
    let mut diagnostic = None;
    let slope = if tail.len() < 2 {
        diagnostic = Some("fewer than two scales".into());
        None
    } else if tail.iter().any(|r| !(r.deviation > 0.0) || !r.deviation.is_finite()) {
        diagnostic = Some("deviation is zero or not finite on the fitted scales".into());
        None
    } else if tail.windows(2).any(|w| (w[1].rho - w[0].rho) * (w[1].deviation - w[0].deviation) < 0.0) {
        diagnostic = Some("deviations are not monotone in rho".into());
        None
    } else {
        Some(ls_slope(&tail.iter().map(|r| (r.rho.ln(), r.deviation.ln())).collect::<Vec<_>>()))
    };
    Ok(FactorizationReport { leading, rows, slope, diagnostic })
}
