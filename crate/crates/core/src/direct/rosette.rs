use std::collections::{BTreeMap, VecDeque};

use num_traits::Zero;
use petgraph::unionfind::UnionFind;

use super::phase::{Lin, LineOrientation, PhaseForm, PhaseVar, VarKind};
use super::DirectError;
use crate::exact::{q, qi, Rational};
use crate::parametric::corner_sign;
use crate::ribbon::{topology, RibbonGraph};

/// One entry of the rosette contour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    /// Corner `h` with its alternating sign.
    Corner(usize, i8),
    /// A contracted line, contributing `+u`.
    Short(usize),
}

/// Contour of the rosette left after contracting a spanning tree.
#[derive(Clone, Debug)]
struct Contour {
    items: Vec<Item>,
    /// Item sign of every half-edge, after the per-vertex flips.
    sign: Vec<i8>,
    /// Tree line -> (parent-side corner, child-side corner).
    tree: BTreeMap<usize, (usize, usize)>,
}

fn validate_tree(g: &RibbonGraph, tree: &[usize]) -> Result<(), DirectError> {
    let mut uf = UnionFind::<usize>::new(g.n_vertices());
    let mut seen = vec![false; g.n_lines()];
    for &l in tree {
        if l >= g.n_lines() {
            return Err(DirectError::LineIndex(l));
        }
        if std::mem::replace(&mut seen[l], true) {
            return Err(DirectError::DuplicateLine(l));
        }
        let (a, b) = g.line_vertices(l);
        if !uf.union(a, b) {
            return Err(DirectError::ContainsLoop(l));
        }
    }
    if tree.len() + 1 != g.n_vertices() {
        return Err(DirectError::NotSpanning);
    }
    Ok(())
}

/// Contracts the tree lines in the given order. Each child cluster is spliced
/// right after the parent-side corner, starting at the child-side corner.
fn contract(g: &RibbonGraph, tree: &[usize], order: &[usize]) -> Result<Contour, DirectError> {
    validate_tree(g, tree)?;
    let mut sorted_order = order.to_vec();
    sorted_order.sort_unstable();
    let mut sorted_tree = tree.to_vec();
    sorted_tree.sort_unstable();
    if sorted_order != sorted_tree {
        return Err(DirectError::Invariant("contraction order is not a permutation of the tree".into()));
    }

    // flip vertex signs along the tree so that both ends of a tree line carry opposite signs
    let n = g.n_vertices();
    let mut tau = vec![0i8; n];
    let mut tree_map = BTreeMap::new();
    tau[g.root()] = 1;
    let mut queue = VecDeque::from([g.root()]);
    while let Some(v) = queue.pop_front() {
        for &l in tree {
            let [a, b] = g.line(l);
            let (pa, ch) = if a / 4 == v && tau[b / 4] == 0 {
                (a, b)
            } else if b / 4 == v && tau[a / 4] == 0 {
                (b, a)
            } else {
                continue;
            };
            tau[ch / 4] = -tau[v] * corner_sign(pa) * corner_sign(ch);
            tree_map.insert(l, (pa, ch));
            queue.push_back(ch / 4);
        }
    }
    let sign: Vec<i8> = (0..g.n_half_edges()).map(|h| tau[h / 4] * corner_sign(h)).collect();

    let mut owner: Vec<usize> = (0..n).collect();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|v| (4 * v..4 * v + 4).collect()).collect();
    for l in order {
        let (a, b) = tree_map[l];
        let (ca, cb) = (owner[a / 4], owner[b / 4]);
        let mut child = std::mem::take(&mut clusters[cb]);
        let k = child.iter().position(|&h| h == b).expect("corner in its cluster");
        child.rotate_left(k);
        let at = clusters[ca].iter().position(|&h| h == a).expect("corner in its cluster");
        clusters[ca].splice(at + 1..at + 1, child);
        owner.iter_mut().filter(|o| **o == cb).for_each(|o| *o = ca);
    }
    let mut seq = std::mem::take(&mut clusters[owner[g.root()]]);
    let start = seq.iter().position(|&h| h == 4 * g.root()).expect("root corner present");
    seq.rotate_left(start);

    let parent_of: BTreeMap<usize, usize> = tree_map.iter().map(|(&l, &(a, _))| (a, l)).collect();
    let mut items = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let h = seq[i];
        if let Some(&l) = parent_of.get(&h) {
            if seq.get(i + 1) != Some(&tree_map[&l].1) {
                return Err(DirectError::Invariant("tree line ends not adjacent on the contour".into()));
            }
            items.push(Item::Short(l));
            i += 2;
        } else {
            items.push(Item::Corner(h, sign[h]));
            i += 1;
        }
    }
    Ok(Contour { items, sign, tree: tree_map })
}

/// Basis position lookup plus the `(u, long)` variable pair of every line.
struct Basis {
    form: PhaseForm,
    corner: BTreeMap<usize, usize>,
    short: BTreeMap<usize, usize>,
    long: BTreeMap<usize, usize>,
}

impl Basis {
    fn new(g: &RibbonGraph, positions: &[usize], shorts: &[usize], longs: &[(usize, bool)]) -> Self {
        let mut vars: Vec<PhaseVar> = positions.iter().map(|&h| PhaseVar::position(g.half_edge_name(h))).collect();
        vars.extend(shorts.iter().map(|&l| PhaseVar { name: format!("u{}", l + 1), kind: VarKind::Short(l) }));
        vars.extend(longs.iter().map(|&(l, tree)| {
            if tree {
                PhaseVar { name: format!("v{}", l + 1), kind: VarKind::Long(l) }
            } else {
                PhaseVar { name: format!("w{}", l + 1), kind: VarKind::LoopLong(l) }
            }
        }));
        let p = positions.len();
        let s = shorts.len();
        Basis {
            form: PhaseForm::zero(vars),
            corner: positions.iter().enumerate().map(|(i, &h)| (h, i)).collect(),
            short: shorts.iter().enumerate().map(|(i, &l)| (l, p + i)).collect(),
            long: longs.iter().enumerate().map(|(i, &(l, _))| (l, p + s + i)).collect(),
        }
    }

    fn unit(&self, i: usize) -> Lin {
        self.form.basis(i)
    }

    fn item(&self, it: Item) -> Lin {
        match it {
            Item::Corner(h, s) => scale(&self.unit(self.corner[&h]), &qi(s as i64)),
            Item::Short(l) => self.unit(self.short[&l]),
        }
    }

    /// Signed item of a line end, written in the line's `(u, long)` pair.
    fn line_end(&self, l: usize, head: bool, sign: i8) -> Lin {
        let u = self.unit(self.short[&l]);
        let w = self.unit(self.long[&l]);
        // x_head = (long + u)/2, x_tail = (long − u)/2
        let x: Lin = u.iter().zip(&w).map(|(a, b)| (b + if head { a.clone() } else { -a.clone() }) * q(1, 2)).collect();
        scale(&x, &qi(sign as i64))
    }
}

fn scale(x: &Lin, k: &Rational) -> Lin {
    x.iter().map(|c| c * k).collect()
}

fn sum(items: &[Lin], n: usize) -> Lin {
    let mut acc = vec![Rational::zero(); n];
    for y in items {
        for (a, c) in acc.iter_mut().zip(y) {
            *a += c;
        }
    }
    acc
}

fn head_tail(g: &RibbonGraph, sign: &[i8], l: usize) -> (usize, usize) {
    let [a, b] = g.line(l);
    if sign[a] > 0 {
        (a, b)
    } else {
        (b, a)
    }
}

/// Adds the correction turning an adjacent item pair `(y_p, y_q)` of line `l`
/// into the single item `u_l`; returns the line's orientation record.
fn tree_correction(g: &RibbonGraph, basis: &mut Basis, c: &Contour, l: usize) -> LineOrientation {
    let (a, b) = c.tree[&l];
    let (head, tail) = head_tail(g, &c.sign, l);
    let ya = basis.line_end(l, a == head, c.sign[a]);
    let yb = basis.line_end(l, b == head, c.sign[b]);
    basis.form.add_wedge(&ya, &yb, &qi(-2));
    LineOrientation {
        line: l,
        head: g.half_edge_name(head).into(),
        tail: g.half_edge_name(tail).into(),
        // oriented towards the root when the parent-side end is the head
        epsilon: if a == head { -1 } else { 1 },
        tree: true,
    }
}

/// Rosette form after a complete first Filk reduction along `tree`.
pub fn filk_reduce(g: &RibbonGraph, tree: &[usize]) -> Result<PhaseForm, DirectError> {
    filk_reduce_ordered(g, tree, tree)
}

/// [`filk_reduce`] with an explicit contraction order of the tree lines.
pub fn filk_reduce_ordered(g: &RibbonGraph, tree: &[usize], order: &[usize]) -> Result<PhaseForm, DirectError> {
    let c = contract(g, tree, order)?;
    let positions: Vec<usize> = c.items.iter().filter_map(|it| if let Item::Corner(h, _) = it { Some(*h) } else { None }).collect();
    let lines: Vec<usize> = c.tree.keys().copied().collect();
    let longs: Vec<(usize, bool)> = lines.iter().map(|&l| (l, true)).collect();
    let mut basis = Basis::new(g, &positions, &lines, &longs);
    let items: Vec<Lin> = c.items.iter().map(|&it| basis.item(it)).collect();
    basis.form.add_ordered_pairs(&items, &qi(-2));
    let mut orient = Vec::new();
    for &l in &lines {
        orient.push(tree_correction(g, &mut basis, &c, l));
    }
    let delta = sum(&items, basis.form.len());
    basis.form.set_delta(&delta)?;
    basis.form.lines = orient;
    Ok(basis.form)
}

/// Vertex contribution of a planar graph with one broken face, over externals,
/// `u` of every line, `v` of tree lines and `w` of loop lines.
pub fn planar_vertex_contribution(g: &RibbonGraph, tree: &[usize]) -> Result<PhaseForm, DirectError> {
    let r = topology(g);
    if r.g != 0 || r.b != 1 {
        return Err(DirectError::NotPlanarRegular { g: r.g, b: r.b });
    }
    let c = contract(g, tree, tree)?;
    // cut the rosette inside the broken face: start at an external corner
    let mut items = c.items.clone();
    let first_ext = items
        .iter()
        .position(|it| matches!(it, Item::Corner(h, _) if g.is_external(*h)))
        .ok_or(DirectError::NotPlanarRegular { g: r.g, b: r.b })?;
    items.rotate_left(first_ext);

    let externals: Vec<usize> =
        items.iter().filter_map(|it| if let Item::Corner(h, _) = it { g.is_external(*h).then_some(*h) } else { None }).collect();
    let all: Vec<usize> = (0..g.n_lines()).collect();
    let longs: Vec<(usize, bool)> = all.iter().map(|&l| (l, c.tree.contains_key(&l))).collect();
    let mut basis = Basis::new(g, &externals, &all, &longs);
    let mut orient = Vec::new();
    for &l in c.tree.keys() {
        orient.push(tree_correction(g, &mut basis, &c, l));
    }

    let pos = |items: &[Option<Item>], h: usize| items.iter().position(|it| matches!(it, Some(Item::Corner(x, _)) if *x == h));
    let mut slots: Vec<Option<Item>> = items.iter().copied().map(Some).collect();
    let mut chords: Vec<(usize, usize, usize)> = (0..g.n_lines())
        .filter(|l| !c.tree.contains_key(l))
        .map(|l| {
            let [a, b] = g.line(l);
            let (pa, pb) = (pos(&slots, a).unwrap(), pos(&slots, b).unwrap());
            (pa.min(pb), pa.max(pb), l)
        })
        .collect();
    // innermost loops first
    chords.sort_by_key(|&(p, q, l)| (q - p, p, l));
    let (head_sign, n) = (&c.sign, basis.form.len());
    for &(p, q, l) in &chords {
        let inner: Vec<Lin> = slots[p + 1..q]
            .iter()
            .flatten()
            .map(|&it| match it {
                Item::Short(_) => Ok(basis.item(it)),
                Item::Corner(..) => Err(DirectError::Invariant(format!("loop line {} encloses a corner", l + 1))),
            })
            .collect::<Result<_, _>>()?;
        let inner = sum(&inner, n);
        let (head, tail) = head_tail(g, head_sign, l);
        let (Some(Item::Corner(hp, sp)), Some(Item::Corner(hq, sq))) = (slots[p], slots[q]) else {
            return Err(DirectError::Invariant("loop ends missing from the rosette".into()));
        };
        if sp == sq {
            return Err(DirectError::Invariant(format!("loop line {} joins equal-sign corners", l + 1)));
        }
        let yp = basis.line_end(l, hp == head, sp);
        let yq = basis.line_end(l, hq == head, sq);
        basis.form.add_wedge(&yp, &yq, &qi(-2));
        basis.form.add_wedge(&inner, &yq, &qi(-4));
        slots[p] = Some(Item::Short(l));
        slots[q] = None;
        orient.push(LineOrientation {
            line: l,
            head: g.half_edge_name(head).into(),
            tail: g.half_edge_name(tail).into(),
            epsilon: if hq == head { 1 } else { -1 },
            tree: false,
        });
    }
    let final_items: Vec<Lin> = slots.iter().flatten().map(|&it| basis.item(it)).collect();
    basis.form.add_ordered_pairs(&final_items, &qi(-2));
    basis.form.set_delta(&sum(&final_items, n))?;
    orient.sort_by_key(|o| o.line);
    basis.form.lines = orient;
    Ok(basis.form)
}

/// Sets every short variable to zero and drops the variables that no longer
/// appear.
pub fn moyality_limit(p: &PhaseForm) -> PhaseForm {
    let keep: Vec<usize> = (0..p.len()).filter(|&i| p.vars[i].kind == VarKind::Position).collect();
    PhaseForm {
        vars: keep.iter().map(|&i| p.vars[i].clone()).collect(),
        matrix: keep.iter().map(|&i| keep.iter().map(|&j| p.matrix[i][j].clone()).collect()).collect(),
        delta: keep.iter().map(|&i| p.delta[i]).collect(),
        lines: Vec::new(),
    }
}
