//! Deciders for logically defined classes of regular tree languages.
//!
//! Each decider checks a family of pseudo-identities on the truncated
//! syntactic pg-pair of a rank-0 language. Quantifications over "the
//! semigroup" range over the proper rank-1 elements: the bare unit is
//! excluded unless some generator term also produces the identity table,
//! since including it would collapse the identities to trivialities.
//!
//! Clauses are checked cheapest first and the first failure short-circuits
//! with a concrete witness that re-evaluates to two distinct tables.

use crate::error::{Error, Result};
use crate::preclone::{compose_transf, omega_power, PgPairTrunc, PrecloneTrunc, Transf};
use crate::terms::Tree;

/// The caps a verdict was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub rank_cap: usize,
    /// Permutation clauses refuse letters of arity above this.
    pub perm_max: usize,
}

pub const DEFAULT_PERM_MAX: usize = 6;

/// One element instantiating a failed identity, printed by its witness term.
#[derive(Debug, Clone)]
pub struct WitnessPart {
    pub role: String,
    pub term: Tree,
    pub transf: Transf,
}

/// A failed instantiation: the elements involved and the two distinct
/// tables the equation's sides evaluate to.
#[derive(Debug, Clone)]
pub struct FailureWitness {
    pub parts: Vec<WitnessPart>,
    pub lhs: Transf,
    pub rhs: Transf,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub answer: bool,
    /// Which clause failed, when the answer is no.
    pub condition_id: Option<&'static str>,
    pub witness: Option<FailureWitness>,
    pub caps: Caps,
    /// Per-clause results, in check order, up to the first failure.
    pub clauses: Vec<(&'static str, bool)>,
}

impl Verdict {
    fn yes(caps: Caps, clauses: Vec<(&'static str, bool)>) -> Verdict {
        Verdict {
            answer: true,
            condition_id: None,
            witness: None,
            caps,
            clauses,
        }
    }

    fn no(
        caps: Caps,
        clauses: Vec<(&'static str, bool)>,
        id: &'static str,
        witness: FailureWitness,
    ) -> Verdict {
        Verdict {
            answer: false,
            condition_id: Some(id),
            witness: Some(witness),
            caps,
            clauses,
        }
    }
}

fn part(role: impl Into<String>, p: &PrecloneTrunc, rank: usize, idx: usize) -> WitnessPart {
    let e = &p.levels[rank][idx];
    WitnessPart {
        role: role.into(),
        term: e.witness.clone(),
        transf: e.transf.clone(),
    }
}

fn letter_part(role: impl Into<String>, p: &PgPairTrunc, gi: usize) -> WitnessPart {
    let g = &p.preclone.generators[gi];
    WitnessPart {
        role: role.into(),
        term: g.witness.clone(),
        transf: g.transf.clone(),
    }
}

/// Left-to-right product of rank-1 elements.
fn product(xs: &[&Transf]) -> Result<Transf> {
    let mut acc = xs[0].clone();
    for x in &xs[1..] {
        acc = compose_transf(&acc, &[x])?;
    }
    Ok(acc)
}

fn power(x: &Transf, n: usize) -> Result<Transf> {
    let mut acc = x.clone();
    for _ in 1..n {
        acc = compose_transf(&acc, &[x])?;
    }
    Ok(acc)
}

/// TL(EX) definability: every idempotent of the proper rank-1 semigroup
/// absorbs on the left, `e.x = e`.
pub fn check_ex(p: &PgPairTrunc) -> Result<Verdict> {
    let tr = &p.preclone;
    if tr.rank_cap < 1 {
        return Err(Error::CapTooSmall {
            cap: tr.rank_cap,
            needed: "rank-1 level".into(),
        });
    }
    let caps = Caps {
        rank_cap: tr.rank_cap,
        perm_max: DEFAULT_PERM_MAX,
    };
    let s1 = tr.proper_rank1();
    for &e in &s1 {
        let et = &tr.levels[1][e].transf;
        if !is_idem(et)? {
            continue;
        }
        for &x in &s1 {
            let xt = &tr.levels[1][x].transf;
            let lhs = compose_transf(et, &[xt])?;
            if lhs.table != et.table {
                return Ok(Verdict::no(
                    caps,
                    vec![("ex-idempotent-absorption", false)],
                    "ex-idempotent-absorption",
                    FailureWitness {
                        parts: vec![part("e", tr, 1, e), part("x", tr, 1, x)],
                        lhs,
                        rhs: et.clone(),
                    },
                ));
            }
        }
    }
    Ok(Verdict::yes(caps, vec![("ex-idempotent-absorption", true)]))
}

fn is_idem(x: &Transf) -> Result<bool> {
    Ok(compose_transf(x, &[x])?.table == x.table)
}

/// FO[Succ] definability: the proper rank-1 semigroup is aperiodic and
/// satisfies the idempotent exchange identity, and every rank-2 element is
/// symmetric in arguments guarded by an idempotent.
pub fn check_fosucc(p: &PgPairTrunc) -> Result<Verdict> {
    let tr = &p.preclone;
    if tr.rank_cap < 2 {
        return Err(Error::CapTooSmall {
            cap: tr.rank_cap,
            needed: "rank-2 level".into(),
        });
    }
    let caps = Caps {
        rank_cap: tr.rank_cap,
        perm_max: DEFAULT_PERM_MAX,
    };
    let mut clauses: Vec<(&'static str, bool)> = Vec::new();
    let s1 = tr.proper_rank1();
    let ell = s1.len();

    // clause 1a: x^l = x^(l+1) with l the size of the proper semigroup
    for &x in &s1 {
        let xt = &tr.levels[1][x].transf;
        let xl = power(xt, ell.max(1))?;
        let xl1 = compose_transf(&xl, &[xt])?;
        if xl.table != xl1.table {
            clauses.push(("fosucc-aperiodicity", false));
            return Ok(Verdict::no(
                caps,
                clauses,
                "fosucc-aperiodicity",
                FailureWitness {
                    parts: vec![part("x", tr, 1, x)],
                    lhs: xl,
                    rhs: xl1,
                },
            ));
        }
    }
    clauses.push(("fosucc-aperiodicity", true));

    // clause 1b: e x f y e z f = e z f y e x f for idempotent e, f
    let idems: Vec<usize> = {
        let mut v = Vec::new();
        for &i in &s1 {
            if is_idem(&tr.levels[1][i].transf)? {
                v.push(i);
            }
        }
        v
    };
    for &e in &idems {
        for &f in &idems {
            for &x in &s1 {
                for &y in &s1 {
                    for &z in &s1 {
                        let et = &tr.levels[1][e].transf;
                        let ft = &tr.levels[1][f].transf;
                        let xt = &tr.levels[1][x].transf;
                        let yt = &tr.levels[1][y].transf;
                        let zt = &tr.levels[1][z].transf;
                        let lhs = product(&[et, xt, ft, yt, et, zt, ft])?;
                        let rhs = product(&[et, zt, ft, yt, et, xt, ft])?;
                        if lhs.table != rhs.table {
                            clauses.push(("fosucc-idempotent-exchange", false));
                            return Ok(Verdict::no(
                                caps,
                                clauses,
                                "fosucc-idempotent-exchange",
                                FailureWitness {
                                    parts: vec![
                                        part("e", tr, 1, e),
                                        part("x", tr, 1, x),
                                        part("f", tr, 1, f),
                                        part("y", tr, 1, y),
                                        part("z", tr, 1, z),
                                    ],
                                    lhs,
                                    rhs,
                                },
                            ));
                        }
                    }
                }
            }
        }
    }
    clauses.push(("fosucc-idempotent-exchange", true));

    // clause 2: x.(e.s + e.t) = x.(e.t + e.s) for x of rank 2
    let p2 = tr.levels[2].len();
    let p0 = tr.levels[0].len();
    let space = p2 * idems.len() * p0 * p0;
    let failure = crate::par::try_find_first_indexed(space, |idx| {
        let x = idx / (idems.len() * p0 * p0);
        let rest = idx % (idems.len() * p0 * p0);
        let e = idems[rest / (p0 * p0)];
        let s = (rest / p0) % p0;
        let t = rest % p0;
        let xt = &tr.levels[2][x].transf;
        let et = &tr.levels[1][e].transf;
        let st = &tr.levels[0][s].transf;
        let tt = &tr.levels[0][t].transf;
        let es = compose_transf(et, &[st])?;
        let et_ = compose_transf(et, &[tt])?;
        let lhs = compose_transf(xt, &[&es, &et_])?;
        let rhs = compose_transf(xt, &[&et_, &es])?;
        if lhs.table != rhs.table {
            Ok(Some((x, e, s, t, lhs, rhs)))
        } else {
            Ok(None)
        }
    })?;
    if let Some((x, e, s, t, lhs, rhs)) = failure {
        clauses.push(("fosucc-argument-swap", false));
        return Ok(Verdict::no(
            caps,
            clauses,
            "fosucc-argument-swap",
            FailureWitness {
                parts: vec![
                    part("x", tr, 2, x),
                    part("e", tr, 1, e),
                    part("s", tr, 0, s),
                    part("t", tr, 0, t),
                ],
                lhs,
                rhs,
            },
        ));
    }
    clauses.push(("fosucc-argument-swap", true));
    Ok(Verdict::yes(caps, clauses))
}

/// The divisibility preorder on the rank-0 level: `s <= t` iff `s = u.t`
/// for some rank-1 element u (the unit gives reflexivity).
#[derive(Debug, Clone)]
pub struct Preorder {
    pub size: usize,
    /// le[s][t] = s is below t
    pub le: Vec<Vec<bool>>,
}

impl Preorder {
    pub fn holds(&self, s: usize, t: usize) -> bool {
        self.le[s][t]
    }
}

pub fn compute_preorder(p: &PgPairTrunc) -> Result<Preorder> {
    let tr = &p.preclone;
    if tr.rank_cap < 1 {
        return Err(Error::CapTooSmall {
            cap: tr.rank_cap,
            needed: "rank-1 level".into(),
        });
    }
    let p0 = tr.levels[0].len();
    let mut le = vec![vec![false; p0]; p0];
    for (s, se) in tr.levels[0].iter().enumerate() {
        for (t, te) in tr.levels[0].iter().enumerate() {
            for u in &tr.levels[1] {
                let ut = compose_transf(&u.transf, &[&te.transf])?;
                if ut.table == se.transf.table {
                    le[s][t] = true;
                    break;
                }
            }
        }
    }
    Ok(Preorder { size: p0, le })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let smaller = permutations(n - 1);
    for p in smaller {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Enumerates tuples over `0..base` of length `len` as digit vectors of an
/// index, most significant first.
fn decode_tuple(mut idx: usize, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0usize; len];
    for pos in (0..len).rev() {
        digits[pos] = idx % base;
        idx /= base;
    }
    digits
}

/// TL(EF) definability, as four clauses over the syntactic pg-pair of a
/// rank-0 language: the rank-1 semigroup satisfies `v(uv)^w = (uv)^w`,
/// letters are symmetric in rank-0 arguments, arguments may be lowered
/// along the divisibility preorder, and letters that the premise makes
/// indistinguishable on a tuple stay indistinguishable under every letter.
pub fn check_ef(p: &PgPairTrunc) -> Result<Verdict> {
    check_ef_with(p, DEFAULT_PERM_MAX)
}

pub fn check_ef_with(p: &PgPairTrunc, perm_max: usize) -> Result<Verdict> {
    let tr = &p.preclone;
    if tr.rank_cap < 1 {
        return Err(Error::CapTooSmall {
            cap: tr.rank_cap,
            needed: "rank-1 level".into(),
        });
    }
    let max_arity = tr.alphabet.max_rank();
    if tr.rank_cap < max_arity {
        return Err(Error::CapTooSmall {
            cap: tr.rank_cap,
            needed: format!("letters reach arity {}", max_arity),
        });
    }
    let caps = Caps {
        rank_cap: tr.rank_cap,
        perm_max,
    };
    let mut clauses: Vec<(&'static str, bool)> = Vec::new();
    let s1 = tr.proper_rank1();

    // clause i: v (uv)^w = (uv)^w
    for &u in &s1 {
        for &v in &s1 {
            let ut = &tr.levels[1][u].transf;
            let vt = &tr.levels[1][v].transf;
            let uv = compose_transf(ut, &[vt])?;
            let w = omega_power(&uv)?;
            let lhs = compose_transf(vt, &[&w])?;
            if lhs.table != w.table {
                clauses.push(("ef-l-trivial", false));
                return Ok(Verdict::no(
                    caps,
                    clauses,
                    "ef-l-trivial",
                    FailureWitness {
                        parts: vec![part("u", tr, 1, u), part("v", tr, 1, v)],
                        lhs,
                        rhs: w,
                    },
                ));
            }
        }
    }
    clauses.push(("ef-l-trivial", true));

    let p0 = tr.levels[0].len();
    let letters: Vec<usize> = (0..tr.generators.len()).collect();

    // clause ii: a.(s_1 + ... + s_n) invariant under permutations
    for &gi in &letters {
        let a = &tr.generators[gi].transf;
        let n = a.rank;
        if n < 2 {
            continue;
        }
        if n > perm_max {
            return Err(Error::EnumerationOverflow(format!(
                "letter of arity {} exceeds the permutation bound {}",
                n, perm_max
            )));
        }
        let perms = permutations(n);
        let space = p0.pow(n as u32);
        let failure = crate::par::try_find_first_indexed(space, |idx| {
            let tuple = decode_tuple(idx, p0, n);
            let args: Vec<&Transf> = tuple.iter().map(|&i| &tr.levels[0][i].transf).collect();
            let lhs = compose_transf(a, &args)?;
            for pi in &perms {
                let permuted: Vec<&Transf> =
                    pi.iter().map(|&j| &tr.levels[0][tuple[j]].transf).collect();
                let rhs = compose_transf(a, &permuted)?;
                if rhs.table != lhs.table {
                    return Ok(Some((tuple.clone(), pi.clone(), lhs, rhs)));
                }
            }
            Ok(None)
        })?;
        if let Some((tuple, pi, lhs, rhs)) = failure {
            clauses.push(("ef-sibling-permutation", false));
            let mut parts = vec![letter_part("a", p, gi)];
            for (i, &si) in tuple.iter().enumerate() {
                parts.push(part(format!("s{}", i + 1), tr, 0, si));
            }
            for (i, &j) in pi.iter().enumerate() {
                parts.push(part(format!("p{}", i + 1), tr, 0, tuple[j]));
            }
            return Ok(Verdict::no(
                caps,
                clauses,
                "ef-sibling-permutation",
                FailureWitness { parts, lhs, rhs },
            ));
        }
    }
    clauses.push(("ef-sibling-permutation", true));

    // clause iii: lowering the first argument along the preorder
    let pre = compute_preorder(p)?;
    for &gi in &letters {
        let a = &tr.generators[gi].transf;
        let n = a.rank;
        if n < 2 {
            continue;
        }
        let space = p0.pow(n as u32);
        let failure = crate::par::try_find_first_indexed(space, |idx| {
            let tuple = decode_tuple(idx, p0, n);
            if !pre.holds(tuple[1], tuple[0]) {
                return Ok(None);
            }
            let args: Vec<&Transf> = tuple.iter().map(|&i| &tr.levels[0][i].transf).collect();
            let lhs = compose_transf(a, &args)?;
            let mut lowered = tuple.clone();
            lowered[0] = lowered[1];
            let args2: Vec<&Transf> = lowered.iter().map(|&i| &tr.levels[0][i].transf).collect();
            let rhs = compose_transf(a, &args2)?;
            if lhs.table != rhs.table {
                Ok(Some((tuple.clone(), lhs, rhs)))
            } else {
                Ok(None)
            }
        })?;
        if let Some((tuple, lhs, rhs)) = failure {
            clauses.push(("ef-order-collapse", false));
            let mut parts = vec![letter_part("a", p, gi)];
            for (i, &si) in tuple.iter().enumerate() {
                parts.push(part(format!("s{}", i + 1), tr, 0, si));
            }
            return Ok(Verdict::no(
                caps,
                clauses,
                "ef-order-collapse",
                FailureWitness { parts, lhs, rhs },
            ));
        }
    }
    clauses.push(("ef-order-collapse", true));

    // clause iv: letters b, c of arity p >= 1 that satisfy
    //   d.(b.y + ... + b.y) = d.y = d.(c.y + ... + c.y) for every d of arity p
    // are interchangeable as the last argument of every letter.
    // Arity 0 is excluded: instantiating the premise with empty tuples makes
    // it vacuous and the conclusion would wrongly separate constants.
    let arities: Vec<usize> = {
        let mut v: Vec<usize> = tr
            .generators
            .iter()
            .map(|g| g.transf.rank)
            .filter(|&r| r >= 1)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for &arity in &arities {
        let same_arity: Vec<usize> = letters
            .iter()
            .copied()
            .filter(|&gi| tr.generators[gi].transf.rank == arity)
            .collect();
        let y_space = p0.pow(arity as u32);
        for &b in &same_arity {
            for &c in &same_arity {
                let bt = &tr.generators[b].transf;
                let ct = &tr.generators[c].transf;
                if bt.table == ct.table {
                    continue;
                }
                let failure = crate::par::try_find_first_indexed(y_space, |yidx| {
                    let y = decode_tuple(yidx, p0, arity);
                    let y_args: Vec<&Transf> = y.iter().map(|&i| &tr.levels[0][i].transf).collect();
                    let by = compose_transf(bt, &y_args)?;
                    let cy = compose_transf(ct, &y_args)?;
                    // premise over every d of this arity
                    for &d in &same_arity {
                        let dt = &tr.generators[d].transf;
                        let dy = compose_transf(dt, &y_args)?;
                        let dby = compose_transf(dt, &vec![&by; arity])?;
                        let dcy = compose_transf(dt, &vec![&cy; arity])?;
                        if dby.table != dy.table || dcy.table != dy.table {
                            return Ok(None);
                        }
                    }
                    // conclusion over every letter and every rank-0 prefix
                    for &ai in &letters {
                        let at = &tr.generators[ai].transf;
                        let n = at.rank;
                        if n < 1 {
                            continue;
                        }
                        let z_space = p0.pow((n - 1) as u32);
                        for zidx in 0..z_space {
                            let z = decode_tuple(zidx, p0, n - 1);
                            let mut args_b: Vec<&Transf> =
                                z.iter().map(|&i| &tr.levels[0][i].transf).collect();
                            let mut args_c = args_b.clone();
                            args_b.push(&by);
                            args_c.push(&cy);
                            let lhs = compose_transf(at, &args_b)?;
                            let rhs = compose_transf(at, &args_c)?;
                            if lhs.table != rhs.table {
                                return Ok(Some((y.clone(), ai, z.clone(), lhs, rhs)));
                            }
                        }
                    }
                    Ok(None)
                })?;
                if let Some((y, ai, z, lhs, rhs)) = failure {
                    clauses.push(("ef-letter-confusion", false));
                    let mut parts = vec![letter_part("b", p, b), letter_part("c", p, c)];
                    for (i, &yi) in y.iter().enumerate() {
                        parts.push(part(format!("y{}", i + 1), tr, 0, yi));
                    }
                    parts.push(letter_part("a", p, ai));
                    for (i, &zi) in z.iter().enumerate() {
                        parts.push(part(format!("z{}", i + 1), tr, 0, zi));
                    }
                    return Ok(Verdict::no(
                        caps,
                        clauses,
                        "ef-letter-confusion",
                        FailureWitness { parts, lhs, rhs },
                    ));
                }
            }
        }
    }
    clauses.push(("ef-letter-confusion", true));
    Ok(Verdict::yes(caps, clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_exists, build_modcount, build_root1, default_delta};
    use crate::preclone::syntactic_pgpair;

    #[test]
    fn ex_fails_on_exists() {
        let p = syntactic_pgpair(&build_exists(&default_delta()), 2).unwrap();
        let v = check_ex(&p).unwrap();
        assert!(!v.answer);
        assert_eq!(v.condition_id, Some("ex-idempotent-absorption"));
        let w = v.witness.unwrap();
        // the witness re-evaluates: e.x differs from e
        let e = &w.parts[0].transf;
        let x = &w.parts[1].transf;
        let ex = compose_transf(e, &[x]).unwrap();
        assert_eq!(ex.table, w.lhs.table);
        assert_eq!(e.table, w.rhs.table);
        assert_ne!(w.lhs.table, w.rhs.table);
    }

    #[test]
    fn ex_holds_on_root_label() {
        let p = syntactic_pgpair(&build_root1(&default_delta()), 2).unwrap();
        let v = check_ex(&p).unwrap();
        assert!(v.answer, "membership depends only on depth 0");
    }

    #[test]
    fn ex_holds_on_trivial_language() {
        // one-state automaton accepting everything
        let delta = default_delta();
        let full = build_exists(&delta).complement();
        let everything = crate::algebra::Dfta::boolean_op(
            crate::algebra::BoolOp::Union,
            &full.complement(),
            &full,
        )
        .unwrap();
        let p = syntactic_pgpair(&everything, 2).unwrap();
        assert_eq!(p.preclone.carrier, 1);
        assert!(check_ex(&p).unwrap().answer);
    }

    #[test]
    fn fosucc_holds_on_exists() {
        let p = syntactic_pgpair(&build_exists(&default_delta()), 2).unwrap();
        let v = check_fosucc(&p).unwrap();
        assert!(v.answer);
        assert!(v.clauses.iter().all(|&(_, ok)| ok));
    }

    #[test]
    fn fosucc_fails_on_modcount_with_aperiodicity_witness() {
        for p_mod in [2usize, 3] {
            let a = build_modcount(&default_delta(), p_mod, 0).unwrap();
            let p = syntactic_pgpair(&a, 2).unwrap();
            let v = check_fosucc(&p).unwrap();
            assert!(!v.answer);
            assert_eq!(v.condition_id, Some("fosucc-aperiodicity"));
            let w = v.witness.unwrap();
            // x is the increment class: composing it with itself l times
            // differs from l+1 times
            assert_ne!(w.lhs.table, w.rhs.table);
        }
    }

    #[test]
    fn preorder_is_reflexive_and_transitive() {
        for a in [
            build_exists(&default_delta()),
            build_modcount(&default_delta(), 3, 1).unwrap(),
        ] {
            let p = syntactic_pgpair(&a, 2).unwrap();
            let pre = compute_preorder(&p).unwrap();
            for s in 0..pre.size {
                assert!(pre.holds(s, s));
                for t in 0..pre.size {
                    for u in 0..pre.size {
                        if pre.holds(s, t) && pre.holds(t, u) {
                            assert!(pre.holds(s, u));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn preorder_on_exists_lacks_false_below_true() {
        let p = syntactic_pgpair(&build_exists(&default_delta()), 2).unwrap();
        let pre = compute_preorder(&p).unwrap();
        // constants sorted by table: [0] = rejecting, [1] = accepting
        let false_idx = p.preclone.find(0, &[0]).unwrap();
        let true_idx = p.preclone.find(0, &[1]).unwrap();
        assert!(
            !pre.holds(false_idx, true_idx),
            "no unary element maps accepting to rejecting"
        );
        assert!(
            pre.holds(true_idx, false_idx),
            "constant-true maps rejecting to accepting"
        );
    }

    #[test]
    fn ef_fails_on_mod2_via_l_triviality() {
        let a = build_modcount(&default_delta(), 2, 0).unwrap();
        let p = syntactic_pgpair(&a, 2).unwrap();
        let v = check_ef(&p).unwrap();
        assert!(!v.answer);
        assert_eq!(v.condition_id, Some("ef-l-trivial"));
        let w = v.witness.unwrap();
        let u = &w.parts[0].transf;
        let vv = &w.parts[1].transf;
        let uv = compose_transf(u, &[vv]).unwrap();
        let om = omega_power(&uv).unwrap();
        let lhs = compose_transf(vv, &[&om]).unwrap();
        assert_eq!(lhs.table, w.lhs.table);
        assert_eq!(om.table, w.rhs.table);
        assert_ne!(lhs.table, om.table);
    }

    #[test]
    fn ef_holds_on_all_ones_language() {
        // complement of "some 0-label occurs": every node is 1-labeled
        let delta = default_delta();
        let exists0 = {
            // build_exists detects 1-labels; relabel by swapping finals via
            // a hand-rolled automaton: state 1 once a 0-label occurred
            let states = vec!["n".to_owned(), "z".to_owned()];
            let tables = delta
                .ids()
                .map(|sym| {
                    let r = delta.rank(sym);
                    let zero = delta.name(sym).starts_with("0_");
                    let size = 2usize.pow(r as u32);
                    (0..size)
                        .map(|row| {
                            if zero {
                                1
                            } else {
                                let mut any = 0u32;
                                let mut rest = row;
                                for _ in 0..r {
                                    any |= (rest % 2) as u32;
                                    rest /= 2;
                                }
                                any
                            }
                        })
                        .collect()
                })
                .collect();
            crate::algebra::Dfta::new(
                delta.clone(),
                states,
                tables,
                std::collections::BTreeSet::from([1]),
            )
            .unwrap()
        };
        let all_ones = exists0.complement();
        let p = syntactic_pgpair(&all_ones, 2).unwrap();
        let v = check_ef(&p).unwrap();
        assert!(v.answer, "failed: {:?}", v.condition_id);
    }

    #[test]
    fn ef_holds_on_one_state_automaton() {
        let delta = default_delta();
        let a = build_exists(&delta);
        let everything =
            crate::algebra::Dfta::boolean_op(crate::algebra::BoolOp::Union, &a, &a.complement())
                .unwrap();
        let p = syntactic_pgpair(&everything, 2).unwrap();
        assert!(check_ef(&p).unwrap().answer);
        // every identity holds in a one-element algebra
        assert!(check_fosucc(&p).unwrap().answer);
        // and the preorder on the single constant is the reflexive pair
        let pre = compute_preorder(&p).unwrap();
        assert_eq!(pre.size, 1);
        assert!(pre.holds(0, 0));
    }

    #[test]
    fn word_shaped_alphabet_keeps_clause2_vacuous() {
        // only ranks 0 and 1: no rank-2 elements, clause 2 has nothing to say
        let alpha = crate::terms::RankedAlphabet::from_pairs(&[("e", 0), ("s", 1)]).unwrap();
        let states = vec!["q0".to_owned(), "q1".to_owned()];
        // "odd number of s": not aperiodic
        let tables = vec![vec![0], vec![1, 0]];
        let a =
            crate::algebra::Dfta::new(alpha, states, tables, std::collections::BTreeSet::from([1]))
                .unwrap();
        let p = syntactic_pgpair(&a, 2).unwrap();
        assert!(p.preclone.levels[2].is_empty());
        let v = check_fosucc(&p).unwrap();
        assert!(!v.answer);
        assert_eq!(v.condition_id, Some("fosucc-aperiodicity"));
    }

    #[test]
    fn permutations_enumerate_n_factorial() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn ef_refuses_letters_above_the_permutation_bound() {
        let p = syntactic_pgpair(&build_exists(&default_delta()), 2).unwrap();
        let err = check_ef_with(&p, 1).unwrap_err();
        assert!(
            matches!(err, crate::Error::EnumerationOverflow(_)),
            "{:?}",
            err
        );
    }

    #[test]
    fn deciders_enforce_their_rank_cap_preconditions() {
        let a = build_exists(&default_delta());
        let p1 = syntactic_pgpair(&a, 1).unwrap();
        assert!(matches!(
            check_fosucc(&p1),
            Err(crate::Error::CapTooSmall { .. })
        ));
        // EX needs only rank 1
        assert!(check_ex(&p1).is_ok());
        // EF requires the cap to reach the letter arities
        assert!(matches!(
            check_ef(&p1),
            Err(crate::Error::CapTooSmall { .. })
        ));
    }
}
