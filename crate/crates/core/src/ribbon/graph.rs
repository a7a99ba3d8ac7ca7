use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::RibbonError;

/// Corner letters used for generated half-edge names.
const CORNER: [char; 4] = ['a', 'b', 'c', 'd'];

/// On-disk description of a graph. Half-edges are named by strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub root: String,
    pub externals: Vec<String>,
    pub lines: Vec<Vec<String>>,
    pub vertices: Vec<VertexSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub corners: Vec<String>,
}

/// A φ⁴ ribbon graph. Half-edge `h` sits at vertex `h / 4`, corner `h % 4`
/// (corners are numbered 0..4 here, 1..4 in the usual sign conventions).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RibbonGraph {
    vertex_ids: Vec<String>,
    names: Vec<String>,
    partner: Vec<Option<usize>>,
    line_of: Vec<Option<usize>>,
    lines: Vec<[usize; 2]>,
    externals: Vec<usize>,
    root: usize,
}

impl RibbonGraph {
    pub fn build(spec: &GraphSpec) -> Result<Self, RibbonError> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut names = Vec::new();
        let mut vertex_ids = Vec::new();
        let mut seen_vertex = BTreeSet::new();
        for v in &spec.vertices {
            if !seen_vertex.insert(v.id.as_str()) {
                return Err(RibbonError::DuplicateVertex(v.id.clone()));
            }
            if v.corners.len() != 4 {
                return Err(RibbonError::CornerCount { vertex: v.id.clone(), found: v.corners.len() });
            }
            for c in &v.corners {
                if index.insert(c.as_str(), names.len()).is_some() {
                    return Err(RibbonError::DuplicateHalfEdge(c.clone()));
                }
                names.push(c.clone());
            }
            vertex_ids.push(v.id.clone());
        }
        let root = vertex_ids
            .iter()
            .position(|v| *v == spec.root)
            .ok_or_else(|| RibbonError::MissingRoot(spec.root.clone()))?;

        let lookup = |name: &str| index.get(name).copied().ok_or_else(|| RibbonError::UnknownHalfEdge(name.to_string()));
        let h = names.len();
        let mut partner = vec![None; h];
        let mut line_of = vec![None; h];
        let mut external = vec![false; h];
        let mut lines = Vec::with_capacity(spec.lines.len());
        for pair in &spec.lines {
            if pair.len() != 2 {
                return Err(RibbonError::LineArity(pair.len()));
            }
            let (a, b) = (lookup(&pair[0])?, lookup(&pair[1])?);
            if a == b {
                return Err(RibbonError::SelfPaired(pair[0].clone()));
            }
            for x in [a, b] {
                if partner[x].is_some() {
                    return Err(RibbonError::DuplicateHalfEdge(names[x].clone()));
                }
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
            line_of[a] = Some(lines.len());
            line_of[b] = Some(lines.len());
            lines.push([a, b]);
        }
        let mut externals = Vec::with_capacity(spec.externals.len());
        for name in &spec.externals {
            let x = lookup(name)?;
            if partner[x].is_some() {
                return Err(RibbonError::LineAndExternal(name.clone()));
            }
            if external[x] {
                return Err(RibbonError::DuplicateHalfEdge(name.clone()));
            }
            external[x] = true;
            externals.push(x);
        }
        if let Some(x) = (0..h).find(|&x| partner[x].is_none() && !external[x]) {
            return Err(RibbonError::Unassigned(names[x].clone()));
        }
        let g = RibbonGraph { vertex_ids, names, partner, line_of, lines, externals, root };
        let mut uf = UnionFind::<usize>::new(g.n_vertices());
        for l in 0..g.n_lines() {
            let (a, b) = g.line_vertices(l);
            uf.union(a, b);
        }
        if (0..g.n_vertices()).any(|v| !uf.equiv(v, 0)) {
            return Err(RibbonError::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from half-edge indices `4v + i`; unpaired half-edges become externals.
    pub fn from_pairing(n_vertices: usize, lines: &[(usize, usize)], root: usize) -> Result<Self, RibbonError> {
        let name = |h: usize| format!("v{}{}", h / 4, CORNER[h % 4]);
        let paired: BTreeSet<usize> = lines.iter().flat_map(|&(a, b)| [a, b]).collect();
        let spec = GraphSpec {
            root: format!("v{root}"),
            externals: (0..4 * n_vertices).filter(|h| !paired.contains(h)).map(name).collect(),
            lines: lines.iter().map(|&(a, b)| vec![name(a), name(b)]).collect(),
            vertices: (0..n_vertices)
                .map(|v| VertexSpec { id: format!("v{v}"), corners: (0..4).map(|i| name(4 * v + i)).collect() })
                .collect(),
        };
        Self::build(&spec)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            root: self.vertex_ids[self.root].clone(),
            externals: self.externals.iter().map(|&h| self.names[h].clone()).collect(),
            lines: self.lines.iter().map(|l| vec![self.names[l[0]].clone(), self.names[l[1]].clone()]).collect(),
            vertices: self
                .vertex_ids
                .iter()
                .enumerate()
                .map(|(v, id)| VertexSpec { id: id.clone(), corners: self.names[4 * v..4 * v + 4].to_vec() })
                .collect(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn n_externals(&self) -> usize {
        self.externals.len()
    }

    pub fn n_half_edges(&self) -> usize {
        self.names.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn half_edge_name(&self, h: usize) -> &str {
        &self.names[h]
    }

    pub fn half_edge_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Half-edges of line `l`, in the order given in the description.
    pub fn line(&self, l: usize) -> [usize; 2] {
        self.lines[l]
    }

    pub fn lines(&self) -> &[[usize; 2]] {
        &self.lines
    }

    pub fn externals(&self) -> &[usize] {
        &self.externals
    }

    pub fn partner(&self, h: usize) -> Option<usize> {
        self.partner[h]
    }

    pub fn line_of(&self, h: usize) -> Option<usize> {
        self.line_of[h]
    }

    pub fn is_external(&self, h: usize) -> bool {
        self.partner[h].is_none()
    }

    pub fn all_lines(&self) -> Vec<usize> {
        (0..self.lines.len()).collect()
    }

    /// Endpoint vertices of line `l`.
    pub fn line_vertices(&self, l: usize) -> (usize, usize) {
        (self.lines[l][0] / 4, self.lines[l][1] / 4)
    }

    /// Connected components of the subgraph formed by `lines`, restricted to the
    /// vertices those lines touch. Each component is a sorted vertex list; the
    /// list of components is sorted by first vertex.
    pub fn components(&self, lines: &[usize]) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut uf = UnionFind::<usize>::new(n);
        let mut touched = vec![false; n];
        for &l in lines {
            let (a, b) = self.line_vertices(l);
            touched[a] = true;
            touched[b] = true;
            uf.union(a, b);
        }
        if lines.is_empty() && lines.len() == self.n_lines() {
            // whole graph without lines: the bare vertex
            touched.iter_mut().for_each(|t| *t = true);
        }
        let mut by_rep: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in (0..n).filter(|&v| touched[v]) {
            by_rep.entry(uf.find(v)).or_default().push(v);
        }
        let mut comps: Vec<Vec<usize>> = by_rep.into_values().collect();
        comps.sort();
        comps
    }
}
