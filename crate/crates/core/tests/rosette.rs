mod common;

use common::{bubble, exhaustive, phase_oracle, random_graph, tadpole, SEED};
use ncphi4::direct::{
    filk_reduce, filk_reduce_ordered, moyal_kernel, moyality_limit, planar_vertex_contribution, vertex_factor, PhaseForm,
    VarKind,
};
use ncphi4::exact::qi;
use ncphi4::ribbon::{spanning_structures, topology, RibbonGraph};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn planar_regular(g: &RibbonGraph) -> bool {
    let r = topology(g);
    r.g == 0 && r.b == 1
}

fn kind_index(f: &PhaseForm, kind: VarKind) -> usize {
    f.vars.iter().position(|v| v.kind == kind).unwrap()
}

#[test]
fn vertex_factor_cyclic_relabeling() {
    let a = vertex_factor(&["x1", "x2", "x3", "x4"]).unwrap();
    let b = vertex_factor(&["x2", "x3", "x4", "x1"]).unwrap();
    // delta flips sign; the named matrices differ only by delta-proportional terms
    for (n, d) in [("x1", 1), ("x2", -1), ("x3", 1), ("x4", -1)] {
        assert_eq!(b.delta[b.index(n).unwrap()], -d);
    }
    let g = RibbonGraph::from_pairing(1, &[], 0).unwrap();
    let mut renamed = b.clone();
    for v in &mut renamed.vars {
        v.name = format!("v0{}", ["a", "b", "c", "d"][v.name[1..].parse::<usize>().unwrap() - 1]);
    }
    phase_oracle(&g, &renamed).unwrap();
    // positionally identical, i.e. conjugated by the permutation as named matrices
    assert_eq!(a.matrix, b.matrix);
    assert_ne!(a.entry("x1", "x2"), b.entry("x1", "x2"));
}

#[test]
fn reference_rosettes() {
    let g = tadpole((0, 1));
    let f = filk_reduce(&g, &[]).unwrap();
    assert_eq!(f.len(), 4);
    phase_oracle(&g, &f).unwrap();
    let b = bubble();
    let f = filk_reduce(&b, &[0]).unwrap();
    phase_oracle(&b, &f).unwrap();
    let u = kind_index(&f, VarKind::Short(0));
    let v = kind_index(&f, VarKind::Long(0));
    assert_eq!(f.matrix[u][v], qi(-f.lines[0].epsilon as i64));
}

fn check_filk(g: &RibbonGraph, tree: &[usize]) {
    let f = filk_reduce(g, tree).unwrap();
    assert!(f.is_antisymmetric());
    phase_oracle(g, &f).unwrap_or_else(|e| panic!("{e}\n{}\ntree {tree:?}\n{}", g.serialize(), f.table()));
    // rosette structure: alternating positions, u–u entries ±2, u–v entries −ε
    let pos: Vec<usize> = (0..f.len()).filter(|&i| f.vars[i].kind == VarKind::Position).collect();
    for (a, &i) in pos.iter().enumerate() {
        for (b, &j) in pos.iter().enumerate().skip(a + 1) {
            assert_eq!(f.matrix[i][j], qi(if (a + b) % 2 == 0 { -2 } else { 2 }));
        }
    }
    for o in &f.lines {
        let u = kind_index(&f, VarKind::Short(o.line));
        let v = kind_index(&f, VarKind::Long(o.line));
        assert_eq!(f.matrix[u][v], qi(-o.epsilon as i64));
        for p in &f.lines {
            if p.line != o.line {
                let u2 = kind_index(&f, VarKind::Short(p.line));
                assert_eq!(f.matrix[u][u2].clone() * f.matrix[u][u2].clone(), qi(4));
            }
        }
    }
}

#[test]
fn filk_matches_oracle_on_corpus() {
    let corpus = exhaustive(3);
    let mut checked = 0;
    for g in &corpus {
        for tree in spanning_structures(g).direct {
            check_filk(g, &tree);
            checked += 1;
        }
    }
    assert!(checked > corpus.len());
}

#[test]
fn filk_independent_of_contraction_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..60 {
        let g = random_graph(&mut rng, 6);
        let trees = spanning_structures(&g).direct;
        let tree = trees.choose(&mut rng).unwrap().clone();
        let reference = filk_reduce(&g, &tree).unwrap();
        for _ in 0..3 {
            let mut order = tree.clone();
            order.shuffle(&mut rng);
            assert_eq!(filk_reduce_ordered(&g, &tree, &order).unwrap(), reference);
        }
    }
}

#[test]
fn planar_contribution_and_moyality() {
    let corpus = exhaustive(3);
    let mut planar = 0;
    for g in corpus.iter().filter(|g| planar_regular(g)) {
        planar += 1;
        for tree in spanning_structures(g).direct {
            let p = planar_vertex_contribution(g, &tree).unwrap();
            assert!(p.is_antisymmetric());
            phase_oracle(g, &p).unwrap_or_else(|e| panic!("{e}\n{}\n{}", g.serialize(), p.table()));
            let m = moyality_limit(&p);
            let names: Vec<&str> = m.vars.iter().map(|v| v.name.as_str()).collect();
            let kernel = moyal_kernel(&names).unwrap();
            assert!(m == kernel || m == kernel.with_negated_delta(), "{}", m.table());
        }
    }
    assert!(planar > 10);
}

#[test]
fn nested_loops_carry_the_nesting_term() {
    // chain v0 - v1 - v2; rosette a b u1 f u2 j k l h d with loop j-k inside loop f-l
    let g = RibbonGraph::from_pairing(3, &[(2, 4), (6, 8), (5, 11), (9, 10)], 0).unwrap();
    assert!(planar_regular(&g));
    let p = planar_vertex_contribution(&g, &[0, 1]).unwrap();
    phase_oracle(&g, &p).unwrap();
    let w_outer = kind_index(&p, VarKind::LoopLong(2));
    let w_inner = kind_index(&p, VarKind::LoopLong(3));
    let eps_outer = p.lines[2].epsilon as i64;
    for inner in [1, 3] {
        // −2ε(l) u_{l'} ∧ w_l for every l' nested in l
        assert_eq!(p.matrix[kind_index(&p, VarKind::Short(inner))][w_outer], qi(-2 * eps_outer));
    }
    assert!(p.matrix[kind_index(&p, VarKind::Short(2))][w_inner].is_zero());
    assert!(p.matrix[kind_index(&p, VarKind::Short(0))][w_outer].is_zero());
}

#[test]
fn random_graphs_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 7);
        let trees = spanning_structures(&g).direct;
        check_filk(&g, trees.choose(&mut rng).unwrap());
    }
}
