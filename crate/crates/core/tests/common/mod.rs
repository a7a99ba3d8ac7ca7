//! Graph corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod faces;
pub mod hu_oracle;
pub mod moyal_oracle;

use std::collections::BTreeSet;

use ncphi4::exact::{nullspace, qi, rank, Rational};
use ncphi4::direct::PhaseForm;
use ncphi4::ribbon::RibbonGraph;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

pub const SEED: u64 = 0x5eed_2024;

/// Random connected graph with at most `max_lines` lines: a random tree first,
/// then random extra pairings of free corners.
pub fn random_graph<R: Rng>(rng: &mut R, max_lines: usize) -> RibbonGraph {
    loop {
        let n = rng.gen_range(1..=max_lines.min(6));
        let max_l = (2 * n).min(max_lines);
        if n - 1 > max_l {
            continue;
        }
        let l = rng.gen_range(n - 1..=max_l);
        let mut free: Vec<bool> = vec![true; 4 * n];
        let mut lines = Vec::new();
        for v in 1..n {
            let a = 4 * v + rng.gen_range(0..4);
            let candidates: Vec<usize> = (0..4 * v).filter(|&h| free[h]).collect();
            let b = *candidates.choose(rng).expect("tree vertices keep a free corner");
            free[a] = false;
            free[b] = false;
            lines.push((b, a));
        }
        while lines.len() < l {
            let candidates: Vec<usize> = (0..4 * n).filter(|&h| free[h]).collect();
            let mut pick = candidates.choose_multiple(rng, 2);
            let (a, b) = (*pick.next().unwrap(), *pick.next().unwrap());
            free[a] = false;
            free[b] = false;
            lines.push((a.min(b), a.max(b)));
        }
        lines.shuffle(rng);
        let root = rng.gen_range(0..n);
        return RibbonGraph::from_pairing(n, &lines, root).expect("generated graph is valid");
    }
}

fn relabel(p: &[(usize, usize)], perm: &[usize], rot: &[usize]) -> Vec<(usize, usize)> {
    let map = |h: usize| 4 * perm[h / 4] + (h % 4 + rot[h / 4]) % 4;
    let mut out: Vec<(usize, usize)> = p.iter().map(|&(a, b)| (map(a).min(map(b)), map(a).max(map(b)))).collect();
    out.sort_unstable();
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn matchings(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    let Some(a) = free.pop() else {
        out.push(cur.clone());
        return;
    };
    // a stays external
    matchings(free, cur, out);
    for i in 0..free.len() {
        let b = free.remove(i);
        cur.push((b.min(a), b.max(a)));
        matchings(free, cur, out);
        cur.pop();
        free.insert(i, b);
    }
    free.push(a);
}

/// Every connected graph with `1 ≤ N ≤ max_n` up to vertex relabeling and
/// corner rotation, rooted at vertex 0, in a deterministic order.
pub fn exhaustive(max_n: usize) -> Vec<RibbonGraph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let perms = permutations(n);
        let rots: Vec<Vec<usize>> = (0..4usize.pow(n as u32)).map(|k| (0..n).map(|v| k / 4usize.pow(v as u32) % 4).collect()).collect();
        let mut all = Vec::new();
        matchings(&mut (0..4 * n).collect(), &mut Vec::new(), &mut all);
        let mut seen = BTreeSet::new();
        for m in all {
            let Ok(_) = RibbonGraph::from_pairing(n, &m, 0) else { continue };
            let canon = perms
                .iter()
                .flat_map(|p| rots.iter().map(move |r| (p, r)))
                .map(|(p, r)| relabel(&m, p, r))
                .min()
                .unwrap();
            if seen.insert(canon.clone()) {
                out.push(RibbonGraph::from_pairing(n, &canon, 0).unwrap());
            }
        }
    }
    out
}

pub fn tadpole(line: (usize, usize)) -> RibbonGraph {
    RibbonGraph::from_pairing(1, &[line], 0).unwrap()
}

pub fn bubble() -> RibbonGraph {
    RibbonGraph::from_pairing(2, &[(0, 5), (1, 4)], 0).unwrap()
}

fn antisym_bilinear(m: &[Vec<Rational>], x: &[Rational], y: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            acc += xi * &m[i][j] * yj;
        }
    }
    acc
}

/// Delta-elimination oracle: writes every corner position in the form's basis,
/// multiplies all vertex factors and compares with `form` on the subspace cut
/// out by all vertex deltas. Also checks that the form's delta is a combination
/// of the vertex deltas.
pub fn phase_oracle(g: &RibbonGraph, form: &PhaseForm) -> Result<(), String> {
    let n = form.len();
    let unit = |i: usize| -> Vec<Rational> { (0..n).map(|k| if k == i { qi(1) } else { qi(0) }).collect() };
    let find = |name: &str| form.vars.iter().position(|v| v.name == name);
    let corner = |h: usize| -> Result<Vec<Rational>, String> {
        let name = g.half_edge_name(h);
        if let Some(i) = find(name) {
            return Ok(unit(i));
        }
        let o = form.lines.iter().find(|o| o.head == name || o.tail == name).ok_or(format!("corner {name} not in basis"))?;
        let u = find(&format!("u{}", o.line + 1)).ok_or("missing u")?;
        let long = find(&format!("{}{}", if o.tree { "v" } else { "w" }, o.line + 1)).ok_or("missing long")?;
        let su = if o.head == name { qi(1) } else { qi(-1) };
        Ok((0..n).map(|k| (if k == long { qi(1) } else { qi(0) } + if k == u { su.clone() } else { qi(0) }) / qi(2)).collect())
    };
    let mut total = vec![vec![Rational::zero(); n]; n];
    let mut deltas = Vec::new();
    for v in 0..g.n_vertices() {
        let x: Vec<Vec<Rational>> = (0..4).map(|i| corner(4 * v + i)).collect::<Result<_, _>>()?;
        for i in 1..=4usize {
            for j in i + 1..=4 {
                let c = qi(if (i + j + 1) % 2 == 0 { 2 } else { -2 });
                for a in 0..n {
                    for b in 0..n {
                        let t = &c * &x[i - 1][a] * &x[j - 1][b];
                        total[a][b] += &t;
                        total[b][a] -= t;
                    }
                }
            }
        }
        deltas.push((0..n).map(|k| &x[0][k] - &x[1][k] + &x[2][k] - &x[3][k]).collect::<Vec<_>>());
    }
    let diff: Vec<Vec<Rational>> = (0..n).map(|a| (0..n).map(|b| &total[a][b] - &form.matrix[a][b]).collect()).collect();
    let kernel = nullspace(&deltas, n);
    for (i, ka) in kernel.iter().enumerate() {
        for kb in &kernel[i + 1..] {
            let r = antisym_bilinear(&diff, ka, kb);
            if !r.is_zero() {
                return Err(format!("phase differs on the delta support by {r}"));
            }
        }
    }
    let cand: Vec<Rational> = form.delta.iter().map(|&d| qi(d)).collect();
    let mut with = deltas.clone();
    with.push(cand.clone());
    if rank(&with) != rank(&deltas) {
        return Err("delta is not implied by the vertex deltas".into());
    }
    if cand.iter().all(|c| c.is_zero()) && deltas.iter().any(|d| d.iter().any(|c| !c.is_zero())) {
        return Err("delta constraint vanishes".into());
    }
    Ok(())
}
