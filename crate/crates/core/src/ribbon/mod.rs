//! Ribbon graphs of the φ⁴ model on Moyal space: topology, power counting,
//! dual graph, spanning trees and subgraph slices.

mod faces;
mod graph;
mod trees;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use faces::{component_counts, trace, ComponentCounts, FaceTrace};
pub use graph::{GraphSpec, RibbonGraph, VertexSpec};
pub use trees::Multigraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RibbonError {
    #[error("half-edge {0} used twice")]
    DuplicateHalfEdge(String),
    #[error("vertex {0} declared twice")]
    DuplicateVertex(String),
    #[error("vertex {vertex} has {found} corners, expected 4")]
    CornerCount { vertex: String, found: usize },
    #[error("half-edge in line and external: {0}")]
    LineAndExternal(String),
    #[error("half-edge {0} is neither in a line nor external")]
    Unassigned(String),
    #[error("unknown half-edge {0}")]
    UnknownHalfEdge(String),
    #[error("line with {0} half-edges, expected 2")]
    LineArity(usize),
    #[error("half-edge {0} paired with itself")]
    SelfPaired(String),
    #[error("root vertex {0} not found")]
    MissingRoot(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("divergence class mismatch: omega={omega} but g={g}, B={b}, Ne={ne}")]
    ClassMismatch { omega: i64, g: usize, b: usize, ne: usize },
    #[error("line {0} out of range")]
    LineIndex(usize),
}

impl RibbonGraph {
    /// Parses a graph description (TOML).
    pub fn parse(text: &str) -> Result<Self, RibbonError> {
        let spec: GraphSpec = toml::from_str(text).map_err(|e| RibbonError::Parse(e.to_string()))?;
        Self::build(&spec)
    }

    pub fn serialize(&self) -> String {
        toml::to_string(&self.to_spec()).expect("graph spec serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub n: usize,
    pub l: usize,
    pub ne: usize,
    pub f: usize,
    pub b: usize,
    pub g: usize,
    pub omega: i64,
}

/// ω = (2 − N_e/2) − 2(2g + B − 1). N_e is always even.
pub fn omega(ne: usize, g: usize, b: usize) -> i64 {
    2 - ne as i64 / 2 - 2 * (2 * g as i64 + b as i64 - 1)
}

pub fn topology(g: &RibbonGraph) -> TopologyReport {
    let comps = component_counts(g, &g.all_lines());
    assert_eq!(comps.len(), 1, "validated graphs are connected");
    let c = comps[0];
    assert_eq!(4 * c.n, g.n_externals() + 2 * c.l);
    assert!(g.n_externals() == 0 || c.b >= 1);
    TopologyReport { n: c.n, l: c.l, ne: g.n_externals(), f: c.f, b: c.b, g: c.g, omega: omega(g.n_externals(), c.g, c.b) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceClass {
    Divergent,
    Convergent,
}

impl std::fmt::Display for DivergenceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DivergenceClass::Divergent => "divergent",
            DivergenceClass::Convergent => "convergent",
        })
    }
}

/// Divergent iff ω ≥ 0; checked against g = 0, B = 1, N_e ∈ {2, 4}.
/// Vacuum graphs have no broken face and fail the check.
pub fn classify(r: &TopologyReport) -> Result<DivergenceClass, RibbonError> {
    let by_omega = r.omega >= 0;
    let by_topology = r.g == 0 && r.b == 1 && (r.ne == 2 || r.ne == 4);
    if by_omega != by_topology {
        return Err(RibbonError::ClassMismatch { omega: r.omega, g: r.g, b: r.b, ne: r.ne });
    }
    Ok(if by_omega { DivergenceClass::Divergent } else { DivergenceClass::Convergent })
}

/// Dual map: one vertex per traced face, same lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    /// Half-edges bounding each face, in tracing order.
    pub faces: Vec<Vec<usize>>,
    /// Line `l` joins faces `lines[l].0` and `lines[l].1`.
    pub lines: Vec<(usize, usize)>,
}

impl DualGraph {
    pub fn as_multigraph(&self) -> Multigraph {
        Multigraph { n_vertices: self.faces.len(), edges: self.lines.clone() }
    }
}

pub fn dual_graph(g: &RibbonGraph) -> DualGraph {
    let t = trace(g, &g.all_lines());
    let face = |h: usize| t.face_of[h].expect("internal half-edges lie on faces");
    let lines = g.lines().iter().map(|&[a, b]| (face(a), face(b))).collect();
    let faces = if g.n_lines() == 0 { vec![Vec::new()] } else { t.faces };
    DualGraph { faces, lines }
}

pub fn direct_multigraph(g: &RibbonGraph) -> Multigraph {
    Multigraph { n_vertices: g.n_vertices(), edges: (0..g.n_lines()).map(|l| g.line_vertices(l)).collect() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningStructures {
    pub direct: Vec<Vec<usize>>,
    pub dual: Vec<Vec<usize>>,
}

pub fn spanning_structures(g: &RibbonGraph) -> SpanningStructures {
    SpanningStructures {
        direct: direct_multigraph(g).spanning_trees(),
        dual: dual_graph(g).as_multigraph().spanning_trees(),
    }
}

/// The subgraph spanned by a set of lines (typically a sector prefix).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSlice {
    pub lines: Vec<usize>,
    pub l: usize,
    pub n: usize,
    pub c: usize,
    pub f: usize,
    pub b: usize,
    pub g: usize,
    pub components: Vec<ComponentCounts>,
}

pub fn subgraph_slice(g: &RibbonGraph, lines: &[usize]) -> Result<SubgraphSlice, RibbonError> {
    if let Some(&l) = lines.iter().find(|&&l| l >= g.n_lines()) {
        return Err(RibbonError::LineIndex(l));
    }
    let comps = if lines.is_empty() { Vec::new() } else { component_counts(g, lines) };
    Ok(SubgraphSlice {
        lines: lines.to_vec(),
        l: lines.len(),
        n: comps.iter().map(|c| c.n).sum(),
        c: comps.len(),
        f: comps.iter().map(|c| c.f).sum(),
        b: comps.iter().map(|c| c.b).sum(),
        g: comps.iter().map(|c| c.g).sum(),
        components: comps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tadpole(line: (usize, usize)) -> RibbonGraph {
        RibbonGraph::from_pairing(1, &[line], 0).unwrap()
    }

    #[test]
    fn reference_graphs() {
        let planar = topology(&tadpole((0, 1)));
        assert_eq!((planar.f, planar.b, planar.g, planar.omega), (2, 1, 0, 1));
        let crossed = topology(&tadpole((0, 2)));
        assert_eq!((crossed.f, crossed.b, crossed.g, crossed.omega), (2, 2, 0, -1));
        let double = topology(&RibbonGraph::from_pairing(1, &[(0, 2), (1, 3)], 0).unwrap());
        assert_eq!((double.f, double.b, double.g), (1, 0, 1));
    }

    #[test]
    fn bare_vertex() {
        let g = RibbonGraph::from_pairing(1, &[], 0).unwrap();
        let r = topology(&g);
        assert_eq!((r.n, r.l, r.ne, r.f, r.b, r.g, r.omega), (1, 0, 4, 1, 1, 0, 0));
    }

    #[test]
    fn rejects_bad_descriptions() {
        let mut spec = tadpole((0, 1)).to_spec();
        spec.externals.push("v0a".into());
        assert_eq!(RibbonGraph::build(&spec), Err(RibbonError::LineAndExternal("v0a".into())));
        let two = RibbonGraph::from_pairing(2, &[(0, 1), (4, 5)], 0);
        assert_eq!(two, Err(RibbonError::Disconnected));
        let mut spec = tadpole((0, 1)).to_spec();
        spec.vertices[0].corners.pop();
        assert!(matches!(RibbonGraph::build(&spec), Err(RibbonError::CornerCount { .. })));
        let mut spec = tadpole((0, 1)).to_spec();
        spec.root = "w".into();
        assert!(matches!(RibbonGraph::build(&spec), Err(RibbonError::MissingRoot(_))));
    }

    #[test]
    fn classify_examples() {
        let r = |ne, g, b| TopologyReport { n: 0, l: 0, ne, f: 0, b, g, omega: omega(ne, g, b) };
        assert_eq!(classify(&r(2, 0, 1)), Ok(DivergenceClass::Divergent));
        assert_eq!(r(2, 0, 1).omega, 1);
        assert_eq!(classify(&r(4, 0, 1)), Ok(DivergenceClass::Divergent));
        assert_eq!(r(4, 0, 1).omega, 0);
        assert_eq!(classify(&r(2, 0, 2)), Ok(DivergenceClass::Convergent));
        assert_eq!(r(2, 0, 2).omega, -1);
    }

    #[test]
    fn dual_examples() {
        let d = dual_graph(&tadpole((0, 1)));
        assert_eq!((d.faces.len(), d.lines.len()), (2, 1));
        assert_ne!(d.lines[0].0, d.lines[0].1);
        let d = dual_graph(&RibbonGraph::from_pairing(1, &[(0, 2), (1, 3)], 0).unwrap());
        assert_eq!(d.faces.len(), 1);
        assert_eq!(d.lines, vec![(0, 0), (0, 0)]);
    }

    #[test]
    fn bubble_slices_and_trees() {
        let g = RibbonGraph::from_pairing(2, &[(0, 4), (1, 5)], 0).unwrap();
        let r = topology(&g);
        assert_eq!((r.n, r.l, r.ne), (2, 2, 4));
        assert_eq!(spanning_structures(&g).direct, vec![vec![0], vec![1]]);
        let s = subgraph_slice(&g, &[0]).unwrap();
        assert_eq!((s.l, s.n, s.c, s.g), (1, 2, 1, 0));
        let empty = subgraph_slice(&g, &[]).unwrap();
        assert_eq!((empty.l, empty.n, empty.c, empty.f), (0, 0, 0, 0));
        let full = subgraph_slice(&g, &[0, 1]).unwrap();
        assert_eq!((full.f, full.b, full.g), (r.f, r.b, r.g));
        assert_eq!(spanning_structures(&tadpole((0, 1))).direct, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn round_trip() {
        let g = RibbonGraph::from_pairing(2, &[(0, 6), (1, 5)], 1).unwrap();
        let text = g.serialize();
        let h = RibbonGraph::parse(&text).unwrap();
        assert_eq!(g, h);
        assert_eq!(text, h.serialize());
    }
}
