use serde::{Deserialize, Serialize};

use super::RibbonGraph;

/// Faces of the ribbon subgraph spanned by a set of lines, traced on the
/// amputated map. Half-edges of touched vertices that are not in the line set
/// are "remembered corners"; each is attributed to the face that passes it.
#[derive(Clone, Debug)]
pub struct FaceTrace {
    /// Each face as the cyclic sequence of active half-edges `h` it leaves from.
    pub faces: Vec<Vec<usize>>,
    /// For every half-edge of the graph: the face it belongs to (active half-edges)
    /// or is remembered on (inactive half-edges of touched vertices).
    pub face_of: Vec<Option<usize>>,
    /// Number of remembered corners on each face.
    pub corners_on: Vec<usize>,
}

impl FaceTrace {
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Faces carrying at least one remembered corner.
    pub fn n_broken(&self) -> usize {
        self.corners_on.iter().filter(|&&c| c > 0).count()
    }
}

/// Next active half-edge after `h` in the cyclic order of its vertex, together
/// with the inactive half-edges skipped on the way.
fn next_active(h: usize, active: &[bool], skipped: &mut Vec<usize>) -> usize {
    let base = h - h % 4;
    for k in 1..=4 {
        let x = base + (h % 4 + k) % 4;
        if active[x] {
            return x;
        }
        skipped.push(x);
    }
    unreachable!("half-edge {h} is active so the loop returns")
}

/// Traces faces of the subgraph spanned by `lines`. Face permutation is
/// `φ(h) = σ'(α(h))`; corners skipped by `σ'` land on the face of `h`.
pub fn trace(g: &RibbonGraph, lines: &[usize]) -> FaceTrace {
    let h_total = g.n_half_edges();
    let mut active = vec![false; h_total];
    for &l in lines {
        for h in g.line(l) {
            active[h] = true;
        }
    }
    let mut face_of = vec![None; h_total];
    let mut faces = Vec::new();
    let mut corners_on = Vec::new();
    let mut skipped = Vec::new();
    for start in 0..h_total {
        if !active[start] || face_of[start].is_some() {
            continue;
        }
        let f = faces.len();
        let mut cycle = Vec::new();
        let mut corners = 0;
        let mut h = start;
        loop {
            face_of[h] = Some(f);
            cycle.push(h);
            skipped.clear();
            let alpha = g.partner(h).expect("active half-edges are paired");
            let next = next_active(alpha, &active, &mut skipped);
            for &x in &skipped {
                face_of[x] = Some(f);
            }
            corners += skipped.len();
            h = next;
            if h == start {
                break;
            }
        }
        faces.push(cycle);
        corners_on.push(corners);
    }
    FaceTrace { faces, face_of, corners_on }
}

/// Topological counts of one connected component of a slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub n: usize,
    pub l: usize,
    pub f: usize,
    pub b: usize,
    pub g: usize,
}

impl ComponentCounts {
    pub fn planar_regular(&self) -> bool {
        self.g == 0 && self.b == 1
    }
}

/// Per-component counts of the subgraph spanned by `lines`. For the whole
/// graph without lines (the bare vertex) returns one component with F = B = 1.
pub fn component_counts(g: &RibbonGraph, lines: &[usize]) -> Vec<ComponentCounts> {
    if lines.is_empty() {
        if g.n_lines() == 0 {
            return vec![ComponentCounts { n: 1, l: 0, f: 1, b: 1, g: 0 }];
        }
        return Vec::new();
    }
    let trace = trace(g, lines);
    let comps = g.components(lines);
    let mut comp_of_vertex = vec![usize::MAX; g.n_vertices()];
    for (c, vs) in comps.iter().enumerate() {
        for &v in vs {
            comp_of_vertex[v] = c;
        }
    }
    let mut out: Vec<ComponentCounts> =
        comps.iter().map(|vs| ComponentCounts { n: vs.len(), l: 0, f: 0, b: 0, g: 0 }).collect();
    for &l in lines {
        out[comp_of_vertex[g.line(l)[0] / 4]].l += 1;
    }
    for (f, cycle) in trace.faces.iter().enumerate() {
        let c = &mut out[comp_of_vertex[cycle[0] / 4]];
        c.f += 1;
        if trace.corners_on[f] > 0 {
            c.b += 1;
        }
    }
    for c in &mut out {
        let twice_g = 2 + c.l as i64 - c.n as i64 - c.f as i64;
        assert!(twice_g >= 0 && twice_g % 2 == 0, "Euler relation violated: n={} l={} f={}", c.n, c.l, c.f);
        c.g = (twice_g / 2) as usize;
    }
    out
}
