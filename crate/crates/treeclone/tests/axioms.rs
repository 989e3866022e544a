//! Structural laws of tree composition, checked on randomized instances and
//! against an independent substitution routine.

mod common;

use common::{random_tree, random_tuple, test_alphabets, Rng};
use proptest::prelude::*;
use std::sync::Arc;
use treeclone::terms::{
    compose_trees, parse_tree, print_tree, Node, RankedAlphabet, Tree, TreeTuple,
};

/// Independent substitution oracle: graft the components without any
/// renumbering, then relabel all variable leaves 1..m in a second pass.
fn oracle_compose(f: &Tree, gs: &TreeTuple) -> Tree {
    #[derive(Clone)]
    enum Raw {
        Sym(treeclone::terms::SymbolId, Vec<Raw>),
        Graft(usize), // index of the component whose tree is pasted here
        Var,          // a variable leaf of a pasted component
    }
    fn to_raw(node: &Node) -> Raw {
        match node {
            Node::Var(i) => Raw::Graft(i - 1),
            Node::Sym(s, cs) => Raw::Sym(*s, cs.iter().map(to_raw).collect()),
        }
    }
    fn component_raw(node: &Node) -> Raw {
        match node {
            Node::Var(_) => Raw::Var,
            Node::Sym(s, cs) => Raw::Sym(*s, cs.iter().map(component_raw).collect()),
        }
    }
    fn expand(raw: &Raw, comps: &[Raw]) -> Raw {
        match raw {
            Raw::Graft(i) => comps[*i].clone(),
            Raw::Var => Raw::Var,
            Raw::Sym(s, cs) => Raw::Sym(*s, cs.iter().map(|c| expand(c, comps)).collect()),
        }
    }
    fn relabel(raw: &Raw, counter: &mut usize) -> Node {
        match raw {
            Raw::Var => {
                *counter += 1;
                Node::Var(*counter)
            }
            Raw::Graft(_) => unreachable!(),
            Raw::Sym(s, cs) => Node::Sym(*s, cs.iter().map(|c| relabel(c, counter)).collect()),
        }
    }
    let comps: Vec<Raw> = gs
        .components()
        .iter()
        .map(|g| component_raw(g.root()))
        .collect();
    let expanded = expand(&to_raw(f.root()), &comps);
    let mut counter = 0;
    let node = relabel(&expanded, &mut counter);
    Tree::new(f.alphabet().clone(), node).expect("oracle output is well-formed")
}

#[test]
fn compose_matches_independent_substitution_oracle() {
    let alpha = RankedAlphabet::from_pairs(&[("a", 2), ("b", 1), ("c0", 0)]).unwrap();
    let f = parse_tree("a(v1,b(v2))", &alpha).unwrap();
    let gs = TreeTuple::new(vec![
        parse_tree("b(v1)", &alpha).unwrap(),
        parse_tree("c0", &alpha).unwrap(),
    ]);
    let composed = compose_trees(&f, &gs).unwrap();
    assert_eq!(composed, oracle_compose(&f, &gs));
    assert_eq!(print_tree(&composed), "a(b(v1),b(c0))");

    let mut rng = Rng::new(42);
    for alpha in test_alphabets() {
        for _ in 0..300 {
            let n = rng.below(3);
            let f = random_tree(&alpha, n, 3, &mut rng);
            let total = if f.rank() == 0 { 0 } else { rng.below(3) };
            let gs = random_tuple(&alpha, f.rank(), total, 3, &mut rng);
            let composed = compose_trees(&f, &gs).unwrap();
            assert_eq!(composed, oracle_compose(&f, &gs));
            assert_eq!(composed.rank(), gs.total_rank());
        }
    }
}

/// Generalized associativity: (f.g).h = f.(g_1.h_1 + ... + g_n.h_n) with h
/// split into consecutive blocks matching the component ranks of g.
fn check_associativity(f: &Tree, gs: &TreeTuple, hs: &TreeTuple) {
    let lhs = compose_trees(&compose_trees(f, gs).unwrap(), hs).unwrap();
    let mut offset = 0usize;
    let mut inner = Vec::with_capacity(gs.len());
    for g in gs.components() {
        let block = TreeTuple::new(hs.components()[offset..offset + g.rank()].to_vec());
        offset += g.rank();
        inner.push(compose_trees(g, &block).unwrap());
    }
    let rhs = compose_trees(f, &TreeTuple::new(inner)).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn associativity_holds_on_random_instances() {
    let mut rng = Rng::new(7);
    for alpha in test_alphabets() {
        for _ in 0..400 {
            let n = rng.below(3);
            let f = random_tree(&alpha, n, 3, &mut rng);
            let total = if f.rank() == 0 { 0 } else { rng.below(4) };
            let gs = random_tuple(&alpha, f.rank(), total, 3, &mut rng);
            let htotal = if gs.total_rank() == 0 {
                0
            } else {
                rng.below(3)
            };
            let hs = random_tuple(&alpha, gs.total_rank(), htotal, 2, &mut rng);
            check_associativity(&f, &gs, &hs);
        }
    }
}

#[test]
fn unit_laws_hold_on_random_instances() {
    let mut rng = Rng::new(19);
    for alpha in test_alphabets() {
        for _ in 0..400 {
            let f = random_tree(&alpha, rng.below(4), 3, &mut rng);
            let unit = Tree::unit(alpha.clone());
            assert_eq!(
                compose_trees(&unit, &TreeTuple::new(vec![f.clone()])).unwrap(),
                f
            );
            let units = TreeTuple::new(vec![Tree::unit(alpha.clone()); f.rank()]);
            assert_eq!(compose_trees(&f, &units).unwrap(), f);
        }
    }
}

fn arb_tree(alpha: Arc<RankedAlphabet>) -> impl Strategy<Value = Tree> {
    (any::<u64>(), 0usize..3).prop_map(move |(seed, rank)| {
        let mut rng = Rng::new(seed);
        random_tree(&alpha, rank, 4, &mut rng)
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(t in arb_tree(treeclone::corpus::default_delta())) {
        let text = print_tree(&t);
        let back = parse_tree(&text, t.alphabet()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn parse_accepts_arbitrary_whitespace(t in arb_tree(treeclone::corpus::default_delta())) {
        let text = print_tree(&t).replace('(', " ( ").replace(',', " , ");
        let back = parse_tree(&text, t.alphabet()).unwrap();
        prop_assert_eq!(back, t);
    }
}
