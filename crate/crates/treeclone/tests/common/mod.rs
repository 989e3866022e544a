//! Shared helpers for the integration tests: a deterministic RNG and
//! generators for random trees with variable frontiers.
#![allow(dead_code)] // each test target uses a different subset

use std::sync::Arc;

use treeclone::terms::{Node, RankedAlphabet, Tree, TreeTuple};

pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.wrapping_mul(2685821657736338717).max(1))
    }

    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

/// A random tree of the requested rank. Budget bounds the depth; once it
/// runs out the smallest completion is forced. Requires a nullary symbol,
/// and a symbol of arity >= 2 when rank >= 2.
pub fn random_tree(alpha: &Arc<RankedAlphabet>, rank: usize, budget: usize, rng: &mut Rng) -> Tree {
    let mut next_var = 1usize;
    let node = rec(alpha, rank, budget, rng, &mut next_var);
    Tree::new(alpha.clone(), node).expect("generated tree is well-formed")
}

fn rec(
    alpha: &Arc<RankedAlphabet>,
    rank: usize,
    budget: usize,
    rng: &mut Rng,
    next_var: &mut usize,
) -> Node {
    if rank == 1 && (budget == 0 || rng.below(3) == 0) {
        let v = *next_var;
        *next_var += 1;
        return Node::Var(v);
    }
    let candidates: Vec<_> = alpha
        .ids()
        .filter(|&s| {
            let r = alpha.rank(s);
            if budget == 0 {
                // forced completion: leaves for rank 0, a genuine split for
                // rank >= 2 so every child strictly shrinks
                if rank == 0 {
                    r == 0
                } else {
                    r >= 2
                }
            } else if rank == 0 {
                true
            } else {
                r >= 1
            }
        })
        .collect();
    let sym = candidates[rng.below(candidates.len())];
    let r = alpha.rank(sym);
    let mut parts = vec![0usize; r];
    if r > 0 {
        if budget == 0 && rank >= 2 {
            parts[0] = 1;
            parts[1] = rank - 1;
        } else {
            for _ in 0..rank {
                let i = rng.below(r);
                parts[i] += 1;
            }
        }
    }
    let children = parts
        .iter()
        .map(|&p| rec(alpha, p, budget.saturating_sub(1), rng, next_var))
        .collect();
    Node::Sym(sym, children)
}

/// A random tuple with the given component count and total rank.
pub fn random_tuple(
    alpha: &Arc<RankedAlphabet>,
    components: usize,
    total_rank: usize,
    budget: usize,
    rng: &mut Rng,
) -> TreeTuple {
    assert!(
        components > 0 || total_rank == 0,
        "a 0-tuple has total rank 0"
    );
    let mut parts = vec![0usize; components];
    for _ in 0..total_rank {
        let i = rng.below(components);
        parts[i] += 1;
    }
    let trees = parts
        .iter()
        .map(|&p| random_tree(alpha, p, budget, rng))
        .collect();
    TreeTuple::new(trees)
}

/// Three alphabets with different shapes for the axiom suites.
pub fn test_alphabets() -> Vec<Arc<RankedAlphabet>> {
    vec![
        treeclone::corpus::default_delta(),
        RankedAlphabet::from_pairs(&[("e", 0), ("a", 1), ("b", 1), ("f", 2)]).unwrap(),
        RankedAlphabet::from_pairs(&[("c0", 0), ("c1", 0), ("u", 1), ("g", 2), ("h", 3)]).unwrap(),
    ]
}
