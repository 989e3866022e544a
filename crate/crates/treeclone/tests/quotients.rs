//! Quotient languages checked against direct evaluation: membership in a
//! two-sided quotient agrees with membership of the recomposed tree.

mod common;

use common::{random_tree, random_tuple, Rng};
use std::sync::Arc;
use treeclone::algebra::RecLang;
use treeclone::corpus::{build_exists, build_modcount, build_path, default_delta};
use treeclone::terms::{compose_trees, Tree, TreeTuple};

#[test]
fn two_sided_quotients_agree_with_direct_evaluation() {
    let delta = default_delta();
    let automata = [
        Arc::new(build_exists(&delta)),
        Arc::new(build_modcount(&delta, 2, 1).unwrap()),
        Arc::new(build_modcount(&delta, 3, 0).unwrap()),
        Arc::new(build_path(&delta)),
    ];
    let mut rng = Rng::new(2024);
    for round in 0..200 {
        let a = automata[round % automata.len()].clone();
        let lang = RecLang::of_automaton(a.clone());

        // right quotient by an n-tuple of ground trees
        let n = 1 + rng.below(2);
        let v = random_tuple(&delta, n, 0, 2, &mut rng);
        let after_right = lang.right_quotient(&v).unwrap();
        assert_eq!(after_right.rank, n);

        // left quotient down to rank m
        let k1 = rng.below(n + 1);
        let k2 = rng.below(n - k1 + 1);
        let m = n - k1 - k2;
        let u = random_tree(&delta, k1 + 1 + k2, 2, &mut rng);
        let both = after_right.left_quotient(&u, k1, k2).unwrap();
        assert_eq!(both.rank, m);

        // membership of t in the quotient iff u.(1^k1 + t + 1^k2).v is in L
        for _ in 0..3 {
            let t = random_tree(&delta, m, 2, &mut rng);
            let mut plug = Vec::with_capacity(k1 + 1 + k2);
            for _ in 0..k1 {
                plug.push(Tree::unit(delta.clone()));
            }
            plug.push(t.clone());
            for _ in 0..k2 {
                plug.push(Tree::unit(delta.clone()));
            }
            let wrapped = compose_trees(&u, &TreeTuple::new(plug)).unwrap();
            let ground = compose_trees(&wrapped, &v).unwrap();
            let direct = lang.member(&ground).unwrap();
            let via_quotient = both.member(&t).unwrap();
            assert_eq!(via_quotient, direct, "round {round}: t={t} u={u}");
        }
    }
}

#[test]
fn left_quotient_requires_compatible_arities() {
    let delta = default_delta();
    let lang = RecLang::of_automaton(Arc::new(build_exists(&delta)));
    let u = random_tree(&delta, 2, 2, &mut Rng::new(9));
    // u has rank 2 but k1 = k2 = 0 requires rank 1
    assert!(lang.left_quotient(&u, 0, 0).is_err());
    // k1 + k2 exceeding the language rank is rejected
    let u1 = random_tree(&delta, 2, 2, &mut Rng::new(10));
    assert!(lang.left_quotient(&u1, 1, 0).is_err());
}

#[test]
fn right_quotient_requires_matching_total_rank() {
    let delta = default_delta();
    let lang = RecLang::of_automaton(Arc::new(build_exists(&delta)));
    let v = TreeTuple::new(vec![random_tree(&delta, 1, 2, &mut Rng::new(11))]);
    assert!(
        lang.right_quotient(&v).is_err(),
        "total rank 1 against a rank-0 language"
    );
}

#[test]
fn quotient_of_quotient_composes() {
    // ((L v^-1) w^-1) acts like quotient by the composed tuple
    let delta = default_delta();
    let lang = RecLang::of_automaton(Arc::new(build_path(&delta)));
    let mut rng = Rng::new(31);
    let v = random_tuple(&delta, 2, 0, 2, &mut rng);
    let q1 = lang.right_quotient(&v).unwrap();
    let w = random_tuple(&delta, 1, 2, 2, &mut rng);
    let q2 = q1.right_quotient(&w).unwrap();
    for _ in 0..20 {
        let t = random_tree(&delta, 1, 3, &mut rng);
        let direct = {
            let tw = compose_trees(&t, &w).unwrap();
            let tv = compose_trees(&tw, &v).unwrap();
            lang.member(&tv).unwrap()
        };
        assert_eq!(q2.member(&t).unwrap(), direct);
    }
}
