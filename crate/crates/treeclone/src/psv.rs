//! Division between truncated pg-pairs and membership in a 1-generated
//! pseudovariety, at desk scale.
//!
//! `t` divides `s^m` iff some rank-preserving assignment of t's letter
//! generators to m-tuples of s's generators extends to a morphism from the
//! generated sub-preclone of the power onto t's truncation. The search
//! enumerates assignments in lexicographic order and checks each one by an
//! image-tracked saturation of pairs; the first success is the certificate.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::preclone::{compose_transf, PgPairTrunc, PrecloneTrunc, Transf};

/// Enumeration budgets; exceeding one yields an explicit inconclusive
/// outcome, never a silent negative.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_assignments: u64,
    pub max_pairs: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_assignments: 2_000_000,
            max_pairs: 200_000,
        }
    }
}

/// A successful division assignment: for each generator of `t` (in
/// generator order), the m-tuple of `s` generator indices it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub exponent: usize,
    pub assignment: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub enum DivisionOutcome {
    Divides(Certificate),
    NotDivides,
    Inconclusive { reason: String },
}

/// The m-th direct power of a truncation, materialized level by level:
/// every m-tuple of same-rank elements, composing componentwise.
#[derive(Debug, Clone)]
pub struct PowerTrunc {
    pub exponent: usize,
    pub levels: Vec<Vec<Vec<Transf>>>,
}

pub fn power_trunc(
    base: &PrecloneTrunc,
    exponent: usize,
    max_level_size: usize,
) -> Result<PowerTrunc> {
    if exponent == 0 {
        return Err(Error::InvalidParameter(
            "power exponent must be positive".into(),
        ));
    }
    let mut levels = Vec::with_capacity(base.levels.len());
    for level in &base.levels {
        let size = level
            .len()
            .checked_pow(exponent as u32)
            .unwrap_or(usize::MAX);
        if size > max_level_size {
            return Err(Error::EnumerationOverflow(format!(
                "power level would have {}^{} elements",
                level.len(),
                exponent
            )));
        }
        let mut tuples = Vec::with_capacity(size);
        if level.is_empty() {
            levels.push(tuples);
            continue;
        }
        let mut idxs = vec![0usize; exponent];
        loop {
            tuples.push(
                idxs.iter()
                    .map(|&i| level[i].transf.clone())
                    .collect::<Vec<_>>(),
            );
            let mut pos = exponent;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idxs[pos] += 1;
                if idxs[pos] < level.len() {
                    break;
                }
                idxs[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
        levels.push(tuples);
    }
    Ok(PowerTrunc { exponent, levels })
}

/// Componentwise composition in a power.
pub fn compose_power(f: &[Transf], gs: &[&[Transf]]) -> Result<Vec<Transf>> {
    let m = f.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let parts: Vec<&Transf> = gs.iter().map(|g| &g[j]).collect();
        out.push(compose_transf(&f[j], &parts)?);
    }
    Ok(out)
}

/// The search bound on the exponent: product over the nonempty generator
/// ranks of `t` of |s generators of that rank| ^ |t generators of that
/// rank|. `None` when the product overflows u64.
pub fn exponent_bound(s_gen_ranks: &[usize], t_gen_ranks: &[usize]) -> Option<u64> {
    let max_rank = t_gen_ranks.iter().copied().max().unwrap_or(0);
    let mut bound: u64 = 1;
    for k in 0..=max_rank {
        let b_k = t_gen_ranks.iter().filter(|&&r| r == k).count() as u32;
        if b_k == 0 {
            continue;
        }
        let a_k = s_gen_ranks.iter().filter(|&&r| r == k).count() as u64;
        let factor = a_k.checked_pow(b_k)?;
        bound = bound.checked_mul(factor)?;
    }
    Some(bound)
}

struct PairLevels {
    /// per level: flattened m tables of the power element, plus the index of
    /// its image in the t level
    elems: Vec<Vec<(Vec<Vec<u32>>, usize)>>,
    index: Vec<HashMap<Vec<Vec<u32>>, usize>>,
    total: usize,
}

impl PairLevels {
    fn new(cap: usize) -> PairLevels {
        PairLevels {
            elems: (0..=cap).map(|_| Vec::new()).collect(),
            index: (0..=cap).map(|_| HashMap::new()).collect(),
            total: 0,
        }
    }

    /// Returns Err(()) on an image conflict, Ok(true) when new.
    fn insert(
        &mut self,
        rank: usize,
        key: Vec<Vec<u32>>,
        image: usize,
    ) -> std::result::Result<bool, ()> {
        if let Some(&i) = self.index[rank].get(&key) {
            if self.elems[rank][i].1 != image {
                return Err(());
            }
            Ok(false)
        } else {
            self.index[rank].insert(key.clone(), self.elems[rank].len());
            self.elems[rank].push((key, image));
            self.total += 1;
            Ok(true)
        }
    }
}

enum AssignmentCheck {
    Morphism,
    Conflict,
    Aborted,
}

/// Image-tracked saturation of the sub-preclone of s^m generated by the
/// assigned tuples, against t's truncation. A pair conflict refutes the
/// assignment; a conflict-free fixpoint certifies the morphism (t is
/// 0-determined over its reachable carrier, and the rank-0 pairs are
/// complete at any cap).
fn check_assignment(
    t: &PgPairTrunc,
    s: &PrecloneTrunc,
    assignment: &[Vec<usize>],
    cap: usize,
    limits: &SearchLimits,
) -> Result<AssignmentCheck> {
    let tp = &t.preclone;
    let m = assignment.first().map(Vec::len).unwrap_or(1);
    let mut pairs = PairLevels::new(cap);
    // seed the unit pair
    if cap >= 1 {
        if let Some(unit_idx) = tp.levels[1].iter().position(|e| e.unit_reachable) {
            let id = Transf::identity(s.carrier);
            let key: Vec<Vec<u32>> = (0..m).map(|_| id.table.clone()).collect();
            if pairs.insert(1, key, unit_idx).is_err() {
                return Ok(AssignmentCheck::Conflict);
            }
        }
    }
    // power generators, aligned with t generators
    let pow_gens: Vec<Vec<&Transf>> = assignment
        .iter()
        .map(|tuple| tuple.iter().map(|&gi| &s.generators[gi].transf).collect())
        .collect();
    loop {
        let mut changed = false;
        for rank in 0..=cap {
            for (gi, tg) in tp.generators.iter().enumerate() {
                let r = tg.transf.rank;
                for comp in crate::preclone::rank_compositions(rank, r) {
                    let lens: Vec<usize> = comp.iter().map(|&mm| pairs.elems[mm].len()).collect();
                    if lens.contains(&0) {
                        continue;
                    }
                    let mut idxs = vec![0usize; r];
                    loop {
                        // compose the t side
                        let t_parts: Vec<&Transf> = comp
                            .iter()
                            .zip(idxs.iter())
                            .map(|(&mm, &i)| {
                                let img = pairs.elems[mm][i].1;
                                &tp.levels[mm][img].transf
                            })
                            .collect();
                        let t_composite = compose_transf(&tg.transf, &t_parts)?;
                        let t_idx = tp.find(rank, &t_composite.table).ok_or_else(|| {
                            Error::InvalidParameter("t truncation is not closed".into())
                        })?;
                        // compose the power side, coordinate by coordinate
                        let mut key = Vec::with_capacity(m);
                        for j in 0..m {
                            let parts: Vec<Transf> = comp
                                .iter()
                                .zip(idxs.iter())
                                .map(|(&mm, &i)| Transf {
                                    carrier: s.carrier,
                                    rank: mm,
                                    table: pairs.elems[mm][i].0[j].clone(),
                                    proper: true,
                                })
                                .collect();
                            let refs: Vec<&Transf> = parts.iter().collect();
                            key.push(compose_transf(pow_gens[gi][j], &refs)?.table);
                        }
                        match pairs.insert(rank, key, t_idx) {
                            Err(()) => return Ok(AssignmentCheck::Conflict),
                            Ok(new) => changed |= new,
                        }
                        if pairs.total > limits.max_pairs {
                            return Ok(AssignmentCheck::Aborted);
                        }
                        let mut pos = r;
                        loop {
                            if pos == 0 {
                                break;
                            }
                            pos -= 1;
                            idxs[pos] += 1;
                            if idxs[pos] < lens[pos] {
                                break;
                            }
                            idxs[pos] = 0;
                            if pos == 0 {
                                pos = usize::MAX;
                                break;
                            }
                        }
                        if pos == usize::MAX || r == 0 {
                            break;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // the projection of the pairs must cover t up to the cap (its
    // generators generate it)
    for rank in 0..=cap {
        let level = &tp.levels[rank];
        for idx in 0..level.len() {
            if !pairs.elems[rank].iter().any(|(_, img)| *img == idx) {
                return Ok(AssignmentCheck::Conflict);
            }
        }
    }
    Ok(AssignmentCheck::Morphism)
}

/// Decides whether t divides s^m, searching assignments of t's generators
/// into m-tuples of s's generators in lexicographic order. The first
/// successful assignment (re-validated) is the certificate.
pub fn divides(
    t: &PgPairTrunc,
    s: &PrecloneTrunc,
    exponent: usize,
    cap: usize,
    limits: &SearchLimits,
) -> Result<DivisionOutcome> {
    if exponent == 0 {
        return Err(Error::InvalidParameter(
            "power exponent must be positive".into(),
        ));
    }
    if cap > t.preclone.rank_cap || cap > s.rank_cap {
        return Err(Error::CapTooSmall {
            cap: t.preclone.rank_cap.min(s.rank_cap),
            needed: format!("division check at rank cap {}", cap),
        });
    }
    // candidate generator indices of s per t-generator, by rank
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for tg in &t.preclone.generators {
        let c: Vec<usize> = (0..s.generators.len())
            .filter(|&i| s.generators[i].transf.rank == tg.transf.rank)
            .collect();
        if c.is_empty() {
            return Ok(DivisionOutcome::NotDivides);
        }
        candidates.push(c);
    }
    // mixed-radix space: per generator, |candidates|^m choices
    let mut radices: Vec<u64> = Vec::new();
    let mut total: u64 = 1;
    let mut overflow = false;
    for c in &candidates {
        let mut r: u64 = 1;
        for _ in 0..exponent {
            r = match r.checked_mul(c.len() as u64) {
                Some(v) => v,
                None => {
                    overflow = true;
                    break;
                }
            };
        }
        radices.push(r);
        total = match total.checked_mul(r) {
            Some(v) => v,
            None => {
                overflow = true;
                break;
            }
        };
    }
    let searched = if overflow {
        limits.max_assignments
    } else {
        total.min(limits.max_assignments)
    };
    let truncated_search = overflow || total > limits.max_assignments;

    let decode = |mut idx: u64| -> Vec<Vec<usize>> {
        let mut assignment = Vec::with_capacity(candidates.len());
        for (c, &radix) in candidates.iter().zip(radices.iter()).rev() {
            let mut local = idx % radix;
            idx /= radix;
            let mut tuple = vec![0usize; exponent];
            for pos in (0..exponent).rev() {
                tuple[pos] = c[(local % c.len() as u64) as usize];
                local /= c.len() as u64;
            }
            assignment.push(tuple);
        }
        assignment.reverse();
        assignment
    };

    let aborted = AtomicBool::new(false);
    let found = crate::par::try_find_first_indexed(searched as usize, |i| {
        let assignment = decode(i as u64);
        match check_assignment(t, s, &assignment, cap, limits)? {
            AssignmentCheck::Morphism => Ok(Some(assignment)),
            AssignmentCheck::Conflict => Ok(None),
            AssignmentCheck::Aborted => {
                aborted.store(true, Ordering::Relaxed);
                Ok(None)
            }
        }
    })?;
    match found {
        Some(assignment) => {
            let cert = Certificate {
                exponent,
                assignment,
            };
            if !validate_certificate(t, s, cap, &cert, limits)? {
                return Err(Error::InvalidParameter(
                    "search produced a certificate that failed re-validation".into(),
                ));
            }
            Ok(DivisionOutcome::Divides(cert))
        }
        None => {
            if truncated_search {
                Ok(DivisionOutcome::Inconclusive {
                    reason: format!(
                        "assignment space larger than budget {}",
                        limits.max_assignments
                    ),
                })
            } else if aborted.load(Ordering::Relaxed) {
                Ok(DivisionOutcome::Inconclusive {
                    reason: format!("pair saturation exceeded budget {}", limits.max_pairs),
                })
            } else {
                Ok(DivisionOutcome::NotDivides)
            }
        }
    }
}

/// Re-runs the image-tracked saturation on a certificate.
pub fn validate_certificate(
    t: &PgPairTrunc,
    s: &PrecloneTrunc,
    cap: usize,
    cert: &Certificate,
    limits: &SearchLimits,
) -> Result<bool> {
    for (tg, tuple) in t.preclone.generators.iter().zip(cert.assignment.iter()) {
        if tuple.len() != cert.exponent {
            return Ok(false);
        }
        if tuple
            .iter()
            .any(|&gi| gi >= s.generators.len() || s.generators[gi].transf.rank != tg.transf.rank)
        {
            return Ok(false);
        }
    }
    Ok(matches!(
        check_assignment(t, s, &cert.assignment, cap, limits)?,
        AssignmentCheck::Morphism
    ))
}

#[derive(Debug, Clone)]
pub enum PsvMembership {
    Member {
        certificate: Certificate,
    },
    /// No division found for any exponent up to the searched cap;
    /// conclusive iff the cap reaches the search bound.
    NotWithinCap {
        searched_cap: usize,
        bound: Option<u64>,
        conclusive: bool,
    },
    Inconclusive {
        searched_cap: usize,
        bound: Option<u64>,
        reason: String,
    },
}

/// Membership of t in the pseudovariety generated by s: iterative deepening
/// on the exponent, reporting the theoretical bound alongside the cap
/// actually searched.
pub fn member_generated(
    t: &PgPairTrunc,
    s: &PgPairTrunc,
    cap: usize,
    max_power: usize,
    limits: &SearchLimits,
) -> Result<PsvMembership> {
    let s_ranks: Vec<usize> = s
        .preclone
        .generators
        .iter()
        .map(|g| g.transf.rank)
        .collect();
    let t_ranks: Vec<usize> = t
        .preclone
        .generators
        .iter()
        .map(|g| g.transf.rank)
        .collect();
    let bound = exponent_bound(&s_ranks, &t_ranks);
    let effective_cap = match bound {
        Some(b) => (max_power as u64).min(b.max(1)) as usize,
        None => max_power,
    };
    for m in 1..=effective_cap {
        match divides(t, &s.preclone, m, cap, limits)? {
            DivisionOutcome::Divides(certificate) => {
                return Ok(PsvMembership::Member { certificate })
            }
            DivisionOutcome::NotDivides => continue,
            DivisionOutcome::Inconclusive { reason } => {
                return Ok(PsvMembership::Inconclusive {
                    searched_cap: m,
                    bound,
                    reason,
                })
            }
        }
    }
    let conclusive = matches!(bound, Some(b) if effective_cap as u64 >= b);
    Ok(PsvMembership::NotWithinCap {
        searched_cap: effective_cap,
        bound,
        conclusive,
    })
}
