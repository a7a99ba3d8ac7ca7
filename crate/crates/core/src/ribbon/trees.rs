use petgraph::unionfind::UnionFind;

/// An undirected multigraph with loops, edges identified by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Multigraph {
    /// All spanning trees as sorted edge-index lists, in lexicographic order.
    pub fn spanning_trees(&self) -> Vec<Vec<usize>> {
        if self.n_vertices == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.n_vertices - 1);
        self.extend(0, &mut chosen, &mut out);
        out
    }

    fn extend(&self, next: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let need = self.n_vertices - 1 - chosen.len();
        if need == 0 {
            out.push(chosen.clone());
            return;
        }
        if self.edges.len() - next < need {
            return;
        }
        for e in next..self.edges.len() {
            if self.edges.len() - e < need {
                break;
            }
            chosen.push(e);
            if self.acyclic(chosen) {
                self.extend(e + 1, chosen, out);
            }
            chosen.pop();
        }
    }

    fn acyclic(&self, edges: &[usize]) -> bool {
        let mut uf = UnionFind::<usize>::new(self.n_vertices);
        edges.iter().all(|&e| uf.union(self.edges[e].0, self.edges[e].1))
    }

    /// True if `edges` contains a spanning tree, i.e. connects all vertices.
    pub fn spans(&self, edges: &[usize]) -> bool {
        let mut uf = UnionFind::<usize>::new(self.n_vertices);
        let mut joined = 0;
        for &e in edges {
            if uf.union(self.edges[e].0, self.edges[e].1) {
                joined += 1;
            }
        }
        joined + 1 == self.n_vertices
    }

    /// True if `edges` is a spanning tree.
    pub fn is_spanning_tree(&self, edges: &[usize]) -> bool {
        edges.len() + 1 == self.n_vertices && self.spans(edges)
    }
}
