//! Face counting and spanning-tree counting independent of the library.

use ncphi4::exact::{det, qi, Rational};
use ncphi4::ribbon::{Multigraph, RibbonGraph};
use num_traits::ToPrimitive;

/// Cycle labels of a permutation given as a successor table over `dom`.
fn cycles(dom: &[usize], next: impl Fn(usize) -> usize, size: usize) -> (usize, Vec<usize>) {
    let mut label = vec![usize::MAX; size];
    let mut n = 0;
    for &h in dom {
        if label[h] != usize::MAX {
            continue;
        }
        let mut x = h;
        while label[x] == usize::MAX {
            label[x] = n;
            x = next(x);
        }
        n += 1;
    }
    (n, label)
}

/// Faces and broken faces recounted from the permutations: `σ'` skips
/// externals, `α` pairs lines; an external is remembered on the face that
/// leaves from the partner of the nearest internal corner before it.
pub fn face_oracle(g: &RibbonGraph) -> (usize, usize, usize) {
    let h_total = g.n_half_edges();
    let internal: Vec<usize> = (0..h_total).filter(|&h| !g.is_external(h)).collect();
    let sigma = |h: usize| (1..=4).map(|k| 4 * (h / 4) + (h % 4 + k) % 4).find(|&x| !g.is_external(x)).unwrap();
    let alpha = |h: usize| g.partner(h).unwrap();
    let (f, label) = cycles(&internal, |h| sigma(alpha(h)), h_total);
    let (n_phi_alpha, _) = cycles(&internal, |h| sigma(alpha(alpha(h))), h_total);
    let mut broken = std::collections::BTreeSet::new();
    for &e in g.externals() {
        let prev = (1..=4).map(|k| 4 * (e / 4) + (e % 4 + 4 - k) % 4).find(|&x| !g.is_external(x));
        if let Some(p) = prev {
            broken.insert(label[alpha(p)]);
        }
    }
    (f, broken.len(), n_phi_alpha)
}

/// Kirchhoff: spanning trees of a multigraph (loops ignored) as a Laplacian minor.
pub fn matrix_tree_count(m: &Multigraph) -> usize {
    if m.n_vertices <= 1 {
        return 1;
    }
    let n = m.n_vertices;
    let mut lap = vec![vec![Rational::from_integer(0.into()); n]; n];
    for &(a, b) in &m.edges {
        if a == b {
            continue;
        }
        lap[a][a] += qi(1);
        lap[b][b] += qi(1);
        lap[a][b] -= qi(1);
        lap[b][a] -= qi(1);
    }
    let minor: Vec<Vec<Rational>> = lap[1..].iter().map(|r| r[1..].to_vec()).collect();
    det(&minor).to_integer().to_usize().unwrap()
}

