//! Finitary preclones of transformations over a finite carrier.
//!
//! Elements are total maps `Q^n -> Q` stored as flat tables. The module
//! computes the sub-preclone generated by the letter actions of a tree
//! automaton up to a rank cap, with a shortest witness term per element,
//! and provides the structural operations built on top of that closure:
//! the rank-1 monoid, omega powers, the separation relations `~_k`,
//! extension of generator maps to morphisms, and isomorphism of
//! truncations.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::Dfta;
use crate::error::{Error, Result};
use crate::terms::{Node, RankedAlphabet, SymbolId, Tree};

/// A rank-n transformation of a finite carrier, stored as a flat table of
/// length `carrier^rank`, row-major over the carrier order (first argument
/// most significant).
///
/// Identity and hashing ignore the `proper` flag: tables are deduplicated
/// by `(carrier, rank, table)` alone, and properness is provenance
/// metadata (whether some generator-rooted term produces the element).
#[derive(Debug, Clone)]
pub struct Transf {
    pub carrier: usize,
    pub rank: usize,
    pub table: Vec<u32>,
    pub proper: bool,
}

impl PartialEq for Transf {
    fn eq(&self, other: &Self) -> bool {
        self.carrier == other.carrier && self.rank == other.rank && self.table == other.table
    }
}

impl Eq for Transf {}

impl std::hash::Hash for Transf {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.carrier.hash(state);
        self.rank.hash(state);
        self.table.hash(state);
    }
}

impl Transf {
    pub fn identity(carrier: usize) -> Transf {
        Transf {
            carrier,
            rank: 1,
            table: (0..carrier as u32).collect(),
            proper: false,
        }
    }

    pub fn constant(carrier: usize, value: u32) -> Transf {
        Transf {
            carrier,
            rank: 0,
            table: vec![value],
            proper: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rank == 1 && self.table.iter().enumerate().all(|(i, &v)| v as usize == i)
    }

    pub fn apply(&self, args: &[u32]) -> u32 {
        debug_assert_eq!(args.len(), self.rank);
        let mut idx = 0usize;
        for &a in args {
            idx = idx * self.carrier + a as usize;
        }
        self.table[idx]
    }

    pub fn is_idempotent(&self) -> bool {
        self.rank == 1 && self.table.iter().all(|&v| self.table[v as usize] == v)
    }
}

/// Composes `f` with the components `gs`. The result has rank equal to the
/// sum of the component ranks, and its table is
/// `h(q_11,...,q_nm) = f(g_1(q_11,...), ..., g_n(...))` with each argument
/// block feeding exactly one component.
pub fn compose_transf(f: &Transf, gs: &[&Transf]) -> Result<Transf> {
    if gs.len() != f.rank {
        return Err(Error::Arity {
            expected: f.rank,
            got: gs.len(),
        });
    }
    let c = f.carrier;
    for g in gs {
        if g.carrier != c {
            return Err(Error::CarrierMismatch(format!(
                "carrier {} vs {}",
                c, g.carrier
            )));
        }
    }
    let m: usize = gs.iter().map(|g| g.rank).sum();
    let size = c.checked_pow(m as u32).ok_or_else(|| {
        Error::EnumerationOverflow(format!("table of rank {} over carrier {}", m, c))
    })?;
    let mut table = Vec::with_capacity(size);
    // Per-block divisors: block i occupies digits of weight c^(m - prefix_i).
    let mut suffix = m;
    let mut block_div = Vec::with_capacity(gs.len());
    let mut block_mod = Vec::with_capacity(gs.len());
    for g in gs {
        suffix -= g.rank;
        block_div.push(c.pow(suffix as u32));
        block_mod.push(c.pow(g.rank as u32));
    }
    for row in 0..size {
        let mut f_idx = 0usize;
        for (i, g) in gs.iter().enumerate() {
            let b = (row / block_div[i]) % block_mod[i];
            f_idx = f_idx * c + g.table[b] as usize;
        }
        table.push(f.table[f_idx]);
    }
    let proper = if f.proper {
        true
    } else {
        // a non-proper f is the bare unit, so the composite is its component
        gs.first().map(|g| g.proper).unwrap_or(false)
    };
    Ok(Transf {
        carrier: c,
        rank: m,
        table,
        proper,
    })
}

/// The unique idempotent among the powers of a rank-1 transformation.
pub fn omega_power(x: &Transf) -> Result<Transf> {
    if x.rank != 1 {
        return Err(Error::Arity {
            expected: 1,
            got: x.rank,
        });
    }
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut powers: Vec<Transf> = vec![x.clone()];
    seen.insert(x.table.clone(), 0);
    loop {
        let last = powers.last().unwrap();
        let sq = compose_transf(last, &[last])?;
        if sq.table == last.table {
            return Ok(last.clone());
        }
        let next = compose_transf(x, &[last])?;
        if let Some(&j) = seen.get(&next.table) {
            // entered the cycle: the idempotent is x^e with e a multiple of
            // the cycle length d, e >= j+1
            let i = powers.len();
            let d = i - j;
            let mut e = j + 1;
            while e % d != 0 {
                e += 1;
            }
            return Ok(powers[e - 1].clone());
        }
        seen.insert(next.table.clone(), powers.len());
        powers.push(next);
    }
}

/// An element of a truncation: the transformation, whether the unit tree
/// reaches it, and one shortest witness term over the generators
/// (`v1` for the bare unit).
#[derive(Debug, Clone)]
pub struct TruncElem {
    pub transf: Transf,
    pub unit_reachable: bool,
    pub witness: Tree,
}

/// A generator of a truncation, with the term naming it (a letter tree for
/// automaton-derived truncations).
#[derive(Debug, Clone)]
pub struct Generator {
    pub transf: Transf,
    pub witness: Tree,
}

/// The rank 0..=cap slices of the sub-preclone of T(Q) generated by the
/// generators, with one shortest witness term per element. Levels are
/// sorted by table for canonical output.
#[derive(Debug, Clone)]
pub struct PrecloneTrunc {
    pub alphabet: Arc<RankedAlphabet>,
    pub carrier: usize,
    pub rank_cap: usize,
    pub levels: Vec<Vec<TruncElem>>,
    pub generators: Vec<Generator>,
    pub warnings: Vec<String>,
}

impl PrecloneTrunc {
    pub fn level(&self, k: usize) -> &[TruncElem] {
        &self.levels[k]
    }

    pub fn find(&self, rank: usize, table: &[u32]) -> Option<usize> {
        self.levels[rank]
            .binary_search_by(|e| e.transf.table.as_slice().cmp(table))
            .ok()
    }

    /// Indices of the proper rank-1 elements (the semigroup the deciders
    /// quantify over; the bare unit is excluded unless a generator term
    /// also produces the identity table).
    pub fn proper_rank1(&self) -> Vec<usize> {
        if self.levels.len() < 2 {
            return Vec::new();
        }
        (0..self.levels[1].len())
            .filter(|&i| self.levels[1][i].transf.proper)
            .collect()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Dump format: one line per element, `rank k: [entries] proper=0|1 witness=<term>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# carrier {} rank-cap {}\n",
            self.carrier, self.rank_cap
        ));
        for (k, level) in self.levels.iter().enumerate() {
            for e in level {
                let entries: Vec<String> = e.transf.table.iter().map(u32::to_string).collect();
                out.push_str(&format!(
                    "rank {}: [{}] proper={} witness={}\n",
                    k,
                    entries.join(" "),
                    if e.transf.proper { 1 } else { 0 },
                    e.witness
                ));
            }
        }
        out
    }
}

/// A truncation together with its letter images: generators are aligned
/// with the alphabet symbols, in alphabet order.
#[derive(Debug, Clone)]
pub struct PgPairTrunc {
    pub preclone: PrecloneTrunc,
}

impl PgPairTrunc {
    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.preclone.alphabet
    }

    pub fn letter(&self, sym: SymbolId) -> &Transf {
        &self.preclone.generators[sym.0].transf
    }
}

pub struct SaturateOptions {
    pub rank_cap: usize,
    /// A warning is recorded when a level grows past this bound.
    pub size_warning_bound: usize,
}

impl SaturateOptions {
    pub fn new(rank_cap: usize) -> Self {
        SaturateOptions {
            rank_cap,
            size_warning_bound: 10_000,
        }
    }
}

/// Default rank cap: levels 0, 1, 2 plus letter images are what the
/// deciders need, so `max(2, max letter arity)`.
pub fn default_rank_cap(alphabet: &RankedAlphabet) -> usize {
    alphabet.max_rank().max(2)
}

/// Enumerates the compositions of `total` into `parts` nonnegative summands,
/// in lexicographic order.
pub(crate) fn rank_compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(pos: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if pos + 1 == cur.len() {
            cur[pos] = remaining;
            out.push(cur.clone());
            return;
        }
        for v in 0..=remaining {
            cur[pos] = v;
            rec(pos + 1, remaining - v, cur, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

struct BuilderElem {
    table: Vec<u32>,
    proper: bool,
    unit_reachable: bool,
}

pub(crate) struct TruncBuilder {
    alphabet: Arc<RankedAlphabet>,
    carrier: usize,
    cap: usize,
    levels: Vec<Vec<BuilderElem>>,
    index: Vec<HashMap<Vec<u32>, usize>>,
    generators: Vec<Generator>,
    warnings: Vec<String>,
    warn_bound: usize,
    warned: Vec<bool>,
}

impl TruncBuilder {
    pub(crate) fn new(
        alphabet: Arc<RankedAlphabet>,
        carrier: usize,
        cap: usize,
        generators: Vec<Generator>,
        warn_bound: usize,
    ) -> TruncBuilder {
        let mut b = TruncBuilder {
            alphabet,
            carrier,
            cap,
            levels: (0..=cap).map(|_| Vec::new()).collect(),
            index: (0..=cap).map(|_| HashMap::new()).collect(),
            generators,
            warnings: Vec::new(),
            warn_bound,
            warned: vec![false; cap + 1],
        };
        if cap >= 1 {
            let id = Transf::identity(b.carrier);
            b.insert(1, id.table, false, true);
        }
        b
    }

    /// Inserts a closed-form element during reference construction; all
    /// such elements are generator-reachable and hence proper.
    pub(crate) fn insert_reference(&mut self, rank: usize, table: Vec<u32>) {
        self.insert(rank, table, true, false);
    }

    fn insert(&mut self, rank: usize, table: Vec<u32>, proper: bool, unit_reachable: bool) -> bool {
        if let Some(&i) = self.index[rank].get(&table) {
            let e = &mut self.levels[rank][i];
            let changed = (proper && !e.proper) || (unit_reachable && !e.unit_reachable);
            e.proper |= proper;
            e.unit_reachable |= unit_reachable;
            changed
        } else {
            let i = self.levels[rank].len();
            self.index[rank].insert(table.clone(), i);
            self.levels[rank].push(BuilderElem {
                table,
                proper,
                unit_reachable,
            });
            if !self.warned[rank] && self.levels[rank].len() > self.warn_bound {
                self.warned[rank] = true;
                self.warnings.push(format!(
                    "level {} exceeds {} elements; consider lowering the rank cap",
                    rank, self.warn_bound
                ));
            }
            true
        }
    }

    /// One closure pass: every generator-rooted composite with components
    /// from the current levels and total rank <= cap. Returns whether
    /// anything changed.
    fn close_pass(&mut self) -> Result<bool> {
        let mut changed = false;
        for k in 0..=self.cap {
            for gi in 0..self.generators.len() {
                let g = self.generators[gi].transf.clone();
                for comp in rank_compositions(k, g.rank) {
                    // snapshot lengths; growth is caught by the outer fixpoint
                    let lens: Vec<usize> = comp.iter().map(|&m| self.levels[m].len()).collect();
                    if lens.contains(&0) {
                        continue;
                    }
                    let mut idxs = vec![0usize; g.rank];
                    loop {
                        let parts: Vec<Transf> = comp
                            .iter()
                            .zip(idxs.iter())
                            .map(|(&m, &i)| {
                                let e = &self.levels[m][i];
                                Transf {
                                    carrier: self.carrier,
                                    rank: m,
                                    table: e.table.clone(),
                                    proper: e.proper,
                                }
                            })
                            .collect();
                        let refs: Vec<&Transf> = parts.iter().collect();
                        let h = compose_transf(&g, &refs)?;
                        changed |= self.insert(k, h.table, true, false);
                        // odometer, rightmost fastest
                        let mut pos = g.rank;
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
                        if pos == usize::MAX || g.rank == 0 {
                            break;
                        }
                    }
                }
            }
        }
        Ok(changed)
    }

    pub(crate) fn close(&mut self) -> Result<bool> {
        let mut grew = false;
        loop {
            let changed = self.close_pass()?;
            grew |= changed;
            if !changed {
                return Ok(grew);
            }
        }
    }

    /// Computes one shortest witness term per element by relaxation to a
    /// fixpoint. Components use `v1` for unit-reachable elements, so proper
    /// witnesses of the identity do not inflate composite witnesses.
    fn witnesses(&self) -> Result<Vec<Vec<Node>>> {
        let mut best: Vec<Vec<Option<Node>>> =
            self.levels.iter().map(|l| vec![None; l.len()]).collect();
        for (k, level) in self.levels.iter().enumerate() {
            for (i, e) in level.iter().enumerate() {
                if e.unit_reachable && !e.proper {
                    best[k][i] = Some(Node::Var(1));
                }
            }
        }
        let comp_witness = |best: &Vec<Vec<Option<Node>>>, m: usize, i: usize| -> Option<Node> {
            if self.levels[m][i].unit_reachable {
                Some(Node::Var(1))
            } else {
                best[m][i].clone()
            }
        };
        loop {
            let mut changed = false;
            for k in 0..=self.cap {
                for g in &self.generators {
                    let gt = &g.transf;
                    let Node::Sym(sym, _) = g.witness.root() else {
                        return Err(Error::InvalidParameter(
                            "generator witness must be a letter tree".into(),
                        ));
                    };
                    for comp in rank_compositions(k, gt.rank) {
                        let lens: Vec<usize> = comp.iter().map(|&m| self.levels[m].len()).collect();
                        if lens.contains(&0) {
                            continue;
                        }
                        let mut idxs = vec![0usize; gt.rank];
                        loop {
                            let ws: Option<Vec<Node>> = comp
                                .iter()
                                .zip(idxs.iter())
                                .map(|(&m, &i)| comp_witness(&best, m, i))
                                .collect();
                            if let Some(ws) = ws {
                                let parts: Vec<Transf> = comp
                                    .iter()
                                    .zip(idxs.iter())
                                    .map(|(&m, &i)| Transf {
                                        carrier: self.carrier,
                                        rank: m,
                                        table: self.levels[m][i].table.clone(),
                                        proper: true,
                                    })
                                    .collect();
                                let refs: Vec<&Transf> = parts.iter().collect();
                                let h = compose_transf(gt, &refs)?;
                                let target = self.index[k][&h.table];
                                // build sym(w1', w2', ...) with shifted variables
                                let mut children = Vec::with_capacity(ws.len());
                                let mut offset = 0usize;
                                for (w, &m) in ws.iter().zip(comp.iter()) {
                                    children.push(shift_node(w, offset));
                                    offset += m;
                                }
                                let cand = Node::Sym(*sym, children);
                                let better = match &best[k][target] {
                                    None => true,
                                    Some(cur) => cand.canonical_cmp(cur) == Ordering::Less,
                                };
                                if better {
                                    best[k][target] = Some(cand);
                                    changed = true;
                                }
                            }
                            let mut pos = gt.rank;
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
                            if pos == usize::MAX || gt.rank == 0 {
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
        let mut out = Vec::with_capacity(best.len());
        for (k, level) in best.into_iter().enumerate() {
            let mut nodes = Vec::with_capacity(level.len());
            for (i, w) in level.into_iter().enumerate() {
                match w {
                    Some(n) => nodes.push(n),
                    None => {
                        return Err(Error::InvalidParameter(format!(
                            "element {} of level {} has no witness; generators do not produce it",
                            i, k
                        )))
                    }
                }
            }
            out.push(nodes);
        }
        Ok(out)
    }

    pub(crate) fn finish(self) -> Result<PrecloneTrunc> {
        let witnesses = self.witnesses()?;
        let mut levels: Vec<Vec<TruncElem>> = Vec::with_capacity(self.levels.len());
        for (k, level) in self.levels.iter().enumerate() {
            let mut elems: Vec<TruncElem> = level
                .iter()
                .zip(witnesses[k].iter())
                .map(|(e, w)| {
                    Ok(TruncElem {
                        transf: Transf {
                            carrier: self.carrier,
                            rank: k,
                            table: e.table.clone(),
                            proper: e.proper,
                        },
                        unit_reachable: e.unit_reachable,
                        witness: Tree::new(self.alphabet.clone(), w.clone())?,
                    })
                })
                .collect::<Result<_>>()?;
            elems.sort_by(|a, b| a.transf.table.cmp(&b.transf.table));
            levels.push(elems);
        }
        Ok(PrecloneTrunc {
            alphabet: self.alphabet,
            carrier: self.carrier,
            rank_cap: self.cap,
            levels,
            generators: self.generators,
            warnings: self.warnings,
        })
    }
}

fn shift_node(node: &Node, offset: usize) -> Node {
    match node {
        Node::Var(i) => Node::Var(i + offset),
        Node::Sym(sym, children) => Node::Sym(
            *sym,
            children.iter().map(|c| shift_node(c, offset)).collect(),
        ),
    }
}

/// Computes the rank 0..=cap slices of the sub-preclone of T(Q) generated
/// by the letter actions of `a`, i.e. the truncation of the pg-pair
/// associated with the automaton.
pub fn saturate(a: &Dfta, rank_cap: usize) -> Result<PgPairTrunc> {
    saturate_with(a, &SaturateOptions::new(rank_cap))
}

pub fn saturate_with(a: &Dfta, opts: &SaturateOptions) -> Result<PgPairTrunc> {
    let alphabet = a.alphabet().clone();
    let generators: Vec<Generator> = alphabet
        .ids()
        .map(|sym| Generator {
            transf: a.letter_transf(sym),
            witness: Tree::letter(alphabet.clone(), sym),
        })
        .collect();
    let mut builder = TruncBuilder::new(
        alphabet,
        a.state_count(),
        opts.rank_cap,
        generators,
        opts.size_warning_bound,
    );
    builder.close()?;
    Ok(PgPairTrunc {
        preclone: builder.finish()?,
    })
}

/// Minimal automaton first, then saturation: the result is the rank-capped
/// slice of the syntactic pg-pair of the automaton's language.
pub fn syntactic_pgpair(a: &Dfta, rank_cap: usize) -> Result<PgPairTrunc> {
    saturate(&a.minimize(), rank_cap)
}

/// The monoid formed by the rank-1 elements of a truncation, with its
/// proper subsemigroup flagged.
#[derive(Debug, Clone)]
pub struct Monoid {
    pub elems: Vec<Transf>,
    /// table[i][j] = index of elems[i] . elems[j]
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub proper: Vec<bool>,
}

impl Monoid {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn is_associative(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.mul(self.mul(i, j), k) != self.mul(i, self.mul(j, k)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Monoid isomorphism by brute-force bijection search; intended for the
    /// small monoids that arise at desk scale.
    pub fn isomorphic_to(&self, other: &Monoid) -> bool {
        let n = self.len();
        if n != other.len() {
            return false;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        fn permutations(
            perm: &mut Vec<usize>,
            k: usize,
            check: &mut impl FnMut(&[usize]) -> bool,
        ) -> bool {
            if k == perm.len() {
                return check(perm);
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                if permutations(perm, k + 1, check) {
                    perm.swap(k, i);
                    return true;
                }
                perm.swap(k, i);
            }
            false
        }
        let mut check = |p: &[usize]| -> bool {
            if p[self.identity] != other.identity {
                return false;
            }
            for i in 0..n {
                for j in 0..n {
                    if p[self.mul(i, j)] != other.mul(p[i], p[j]) {
                        return false;
                    }
                }
            }
            true
        };
        permutations(&mut perm, 0, &mut check)
    }
}

/// Multiplication table over the rank-1 level, plus the proper subsemigroup.
pub fn rank1_monoid(p: &PrecloneTrunc) -> Result<Monoid> {
    if p.rank_cap < 1 {
        return Err(Error::CapTooSmall {
            cap: p.rank_cap,
            needed: "rank-1 level".into(),
        });
    }
    let elems: Vec<Transf> = p.levels[1].iter().map(|e| e.transf.clone()).collect();
    let n = elems.len();
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let prod = compose_transf(&elems[i], &[&elems[j]])?;
            table[i][j] = p
                .find(1, &prod.table)
                .ok_or_else(|| Error::InvalidParameter("rank-1 level is not closed".into()))?;
        }
    }
    let identity = elems
        .iter()
        .position(Transf::is_identity)
        .ok_or_else(|| Error::InvalidParameter("rank-1 level lacks the identity".into()))?;
    let proper = p.levels[1].iter().map(|e| e.transf.proper).collect();
    Ok(Monoid {
        elems,
        table,
        identity,
        proper,
    })
}

/// The partition of each level under `~_k`: f ~ g iff `f.h = g.h` for every
/// tuple `h` of elements with total rank at most k.
#[derive(Debug, Clone)]
pub struct SimkPartition {
    pub k: usize,
    /// classes[level][elem] = class id within that level
    pub classes: Vec<Vec<usize>>,
    /// true iff every class is a singleton (the truncation is k-determined
    /// as far as the cap shows)
    pub k_determined: bool,
}

pub fn sim_k(p: &PrecloneTrunc, k: usize) -> Result<SimkPartition> {
    if k > p.rank_cap {
        return Err(Error::CapTooSmall {
            cap: p.rank_cap,
            needed: format!("~_{} needs levels up to {}", k, k),
        });
    }
    let mut classes = Vec::with_capacity(p.levels.len());
    let mut determined = true;
    for (n, level) in p.levels.iter().enumerate() {
        // profile of f = the sequence of f.h over every admissible tuple h
        let mut profiles: Vec<Vec<Vec<u32>>> = vec![Vec::new(); level.len()];
        for ell in 0..=k {
            for comp in rank_compositions(ell, n) {
                let lens: Vec<usize> = comp.iter().map(|&m| p.levels[m].len()).collect();
                if lens.contains(&0) {
                    continue;
                }
                let mut idxs = vec![0usize; n];
                loop {
                    let parts: Vec<&Transf> = comp
                        .iter()
                        .zip(idxs.iter())
                        .map(|(&m, &i)| &p.levels[m][i].transf)
                        .collect();
                    for (fi, f) in level.iter().enumerate() {
                        let h = compose_transf(&f.transf, &parts)?;
                        profiles[fi].push(h.table);
                    }
                    let mut pos = n;
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
                    if pos == usize::MAX || n == 0 {
                        break;
                    }
                }
            }
        }
        let mut class_of = vec![usize::MAX; level.len()];
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..level.len() {
            let found = reps.iter().position(|&r| profiles[r] == profiles[i]);
            match found {
                Some(c) => class_of[i] = c,
                None => {
                    class_of[i] = reps.len();
                    reps.push(i);
                }
            }
        }
        if reps.len() != level.len() {
            determined = false;
        }
        classes.push(class_of);
    }
    Ok(SimkPartition {
        k,
        classes,
        k_determined: determined,
    })
}

/// Image of every element of a source truncation under a morphism, aligned
/// with the source levels.
#[derive(Debug, Clone)]
pub struct MorphismMap {
    pub images: Vec<Vec<Transf>>,
}

impl MorphismMap {
    pub fn injective_per_level(&self) -> bool {
        self.images.iter().all(|level| {
            let mut seen: Vec<&Vec<u32>> = level.iter().map(|t| &t.table).collect();
            seen.sort();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }
}

/// Two source terms that denote the same element but whose images differ.
#[derive(Debug, Clone)]
pub struct ConflictWitness {
    pub rank: usize,
    pub term1: Tree,
    pub term2: Tree,
    pub image1: Transf,
    pub image2: Transf,
}

#[derive(Debug, Clone)]
pub enum Extension {
    /// The generator map extends to a morphism on all truncation levels.
    Extends(MorphismMap),
    /// The map cannot extend; the witness re-evaluates to the inequality.
    Conflict(Box<ConflictWitness>),
    /// No conflict found, but the image does not cover the target level
    /// required by the determination degree, so extension is not certified.
    CoverageGap { rank: usize },
}

/// Attempts to extend a rank-preserving map of the source generators into a
/// target carrier to a preclone morphism, by tracking the putative image of
/// every source element along the saturation closure. `k` is the
/// determination degree of the target (0 for transformation truncations
/// over a reachable carrier).
pub fn extend_generator_map(
    src: &PgPairTrunc,
    images: &[Transf],
    target: &PrecloneTrunc,
    k: usize,
) -> Result<Extension> {
    let sp = &src.preclone;
    if images.len() != sp.generators.len() {
        return Err(Error::Arity {
            expected: sp.generators.len(),
            got: images.len(),
        });
    }
    for (g, im) in sp.generators.iter().zip(images.iter()) {
        if g.transf.rank != im.rank {
            return Err(Error::Arity {
                expected: g.transf.rank,
                got: im.rank,
            });
        }
        if im.carrier != target.carrier {
            return Err(Error::CarrierMismatch(format!(
                "image carrier {} vs target carrier {}",
                im.carrier, target.carrier
            )));
        }
    }
    if k > sp.rank_cap || k > target.rank_cap {
        return Err(Error::CapTooSmall {
            cap: sp.rank_cap.min(target.rank_cap),
            needed: format!("determination degree {}", k),
        });
    }

    let mut img: Vec<Vec<Option<(Transf, Node)>>> =
        sp.levels.iter().map(|l| vec![None; l.len()]).collect();
    if sp.rank_cap >= 1 {
        if let Some(unit_idx) = sp.levels[1].iter().position(|e| e.unit_reachable) {
            img[1][unit_idx] = Some((Transf::identity(target.carrier), Node::Var(1)));
        }
    }
    loop {
        let mut changed = false;
        for rank in 0..=sp.rank_cap {
            for (gi, g) in sp.generators.iter().enumerate() {
                let gt = &g.transf;
                let Node::Sym(sym, _) = g.witness.root() else {
                    return Err(Error::InvalidParameter(
                        "generator witness must be a letter tree".into(),
                    ));
                };
                for comp in rank_compositions(rank, gt.rank) {
                    let lens: Vec<usize> = comp.iter().map(|&m| sp.levels[m].len()).collect();
                    if lens.contains(&0) {
                        continue;
                    }
                    let mut idxs = vec![0usize; gt.rank];
                    loop {
                        let have_images = comp
                            .iter()
                            .zip(idxs.iter())
                            .all(|(&m, &i)| img[m][i].is_some());
                        if have_images {
                            let parts: Vec<&Transf> = comp
                                .iter()
                                .zip(idxs.iter())
                                .map(|(&m, &i)| &sp.levels[m][i].transf)
                                .collect();
                            let composite = compose_transf(gt, &parts)?;
                            let target_idx = sp.find(rank, &composite.table).ok_or_else(|| {
                                Error::InvalidParameter("source truncation is not closed".into())
                            })?;
                            let img_parts: Vec<&Transf> = comp
                                .iter()
                                .zip(idxs.iter())
                                .map(|(&m, &i)| &img[m][i].as_ref().unwrap().0)
                                .collect();
                            let image = compose_transf(&images[gi], &img_parts)?;
                            let mut children = Vec::with_capacity(comp.len());
                            let mut offset = 0usize;
                            for (&m, &i) in comp.iter().zip(idxs.iter()) {
                                children.push(shift_node(&img[m][i].as_ref().unwrap().1, offset));
                                offset += m;
                            }
                            let term = Node::Sym(*sym, children);
                            match &img[rank][target_idx] {
                                None => {
                                    img[rank][target_idx] = Some((image, term));
                                    changed = true;
                                }
                                Some((existing, existing_term)) => {
                                    if existing.table != image.table {
                                        return Ok(Extension::Conflict(Box::new(
                                            ConflictWitness {
                                                rank,
                                                term1: Tree::new(
                                                    sp.alphabet.clone(),
                                                    existing_term.clone(),
                                                )?,
                                                term2: Tree::new(sp.alphabet.clone(), term)?,
                                                image1: existing.clone(),
                                                image2: image,
                                            },
                                        )));
                                    }
                                }
                            }
                        }
                        let mut pos = gt.rank;
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
                        if pos == usize::MAX || gt.rank == 0 {
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

    let mut result = Vec::with_capacity(img.len());
    for (rank, level) in img.iter().enumerate() {
        let mut images_level = Vec::with_capacity(level.len());
        for (i, entry) in level.iter().enumerate() {
            match entry {
                Some((t, _)) => images_level.push(t.clone()),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "element {} of level {} was never reached; truncation inconsistent",
                        i, rank
                    )))
                }
            }
        }
        result.push(images_level);
    }

    // coverage of the target levels up to the determination degree
    for ell in 0..=k {
        for te in &target.levels[ell] {
            let covered = result[ell].iter().any(|t| t.table == te.transf.table);
            if !covered {
                return Ok(Extension::CoverageGap { rank: ell });
            }
        }
    }
    Ok(Extension::Extends(MorphismMap { images: result }))
}

/// Checks that a per-level map preserves every in-cap composition, every
/// letter image, and the unit.
fn verify_morphism(
    p: &PgPairTrunc,
    q: &PgPairTrunc,
    map: &MorphismMap,
    cap: usize,
) -> Result<bool> {
    let sp = &p.preclone;
    let image_of = |rank: usize, table: &[u32]| -> Option<&Transf> {
        sp.find(rank, table).map(|i| &map.images[rank][i])
    };
    // letters of rank <= cap map to corresponding letters
    for (i, g) in sp.generators.iter().enumerate() {
        if g.transf.rank <= cap {
            match image_of(g.transf.rank, &g.transf.table) {
                Some(img) => {
                    if img.table != q.preclone.generators[i].transf.table {
                        return Ok(false);
                    }
                }
                None => return Ok(false),
            }
        }
    }
    // unit maps to unit
    if cap >= 1 {
        if let Some(i) = sp.levels[1].iter().position(|e| e.unit_reachable) {
            if !map.images[1][i].is_identity() {
                return Ok(false);
            }
        }
    }
    // all compositions f.(h1 + ... + hn) with f in a level or f a letter of
    // any rank, components from levels, total rank <= cap
    enum Head<'a> {
        Level(usize, usize),
        Letter(usize, &'a Transf),
    }
    let mut heads: Vec<(usize, Head)> = Vec::new();
    for n in 0..=cap {
        for i in 0..sp.levels[n].len() {
            heads.push((n, Head::Level(n, i)));
        }
    }
    for (gi, g) in sp.generators.iter().enumerate() {
        if g.transf.rank > cap {
            heads.push((g.transf.rank, Head::Letter(gi, &g.transf)));
        }
    }
    for (n, head) in &heads {
        let (f, f_img): (&Transf, &Transf) = match head {
            Head::Level(rank, i) => (&sp.levels[*rank][*i].transf, &map.images[*rank][*i]),
            Head::Letter(gi, t) => (*t, &q.preclone.generators[*gi].transf),
        };
        for ell in 0..=cap {
            for comp in rank_compositions(ell, *n) {
                let lens: Vec<usize> = comp.iter().map(|&m| sp.levels[m].len()).collect();
                if lens.contains(&0) {
                    continue;
                }
                let mut idxs = vec![0usize; *n];
                loop {
                    let parts: Vec<&Transf> = comp
                        .iter()
                        .zip(idxs.iter())
                        .map(|(&m, &i)| &sp.levels[m][i].transf)
                        .collect();
                    let lhs = compose_transf(f, &parts)?;
                    let lhs_img = match image_of(ell, &lhs.table) {
                        Some(t) => t,
                        None => return Ok(false),
                    };
                    let img_parts: Vec<&Transf> = comp
                        .iter()
                        .zip(idxs.iter())
                        .map(|(&m, &i)| &map.images[m][i])
                        .collect();
                    let rhs = compose_transf(f_img, &img_parts)?;
                    if lhs_img.table != rhs.table {
                        return Ok(false);
                    }
                    let mut pos = *n;
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
                    if pos == usize::MAX || *n == 0 {
                        break;
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Decides whether two truncated pg-pairs are isomorphic up to the cap:
/// per-level bijections preserving all in-cap compositions and the letter
/// correspondence. The letter correspondence forces the bijection, so the
/// search reduces to building the forced map and verifying it.
pub fn iso_truncation(
    p: &PgPairTrunc,
    q: &PgPairTrunc,
    cap: usize,
) -> Result<(bool, Option<MorphismMap>)> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch(
            "pg-pairs over different alphabets".into(),
        ));
    }
    if cap > p.preclone.rank_cap || cap > q.preclone.rank_cap {
        return Err(Error::CapTooSmall {
            cap: p.preclone.rank_cap.min(q.preclone.rank_cap),
            needed: format!("isomorphism up to rank {}", cap),
        });
    }
    for ell in 0..=cap {
        if p.preclone.levels[ell].len() != q.preclone.levels[ell].len() {
            return Ok((false, None));
        }
    }
    let images: Vec<Transf> = q
        .preclone
        .generators
        .iter()
        .map(|g| g.transf.clone())
        .collect();
    match extend_generator_map(p, &images, &q.preclone, 0)? {
        Extension::Extends(map) => {
            if !map.injective_per_level() {
                return Ok((false, None));
            }
            if !verify_morphism(p, q, &map, cap)? {
                return Ok((false, None));
            }
            Ok((true, Some(map)))
        }
        _ => Ok((false, None)),
    }
}
