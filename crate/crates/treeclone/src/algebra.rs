//! Complete deterministic bottom-up tree automata and the languages they
//! recognize.
//!
//! An automaton is a finite algebra over a ranked alphabet: one total table
//! per symbol, plus final states. Minimization quotients by the coarsest
//! congruence separating finals and renames states canonically, so two
//! automata for the same language minimize to byte-identical output.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, ParseError, Result};
use crate::preclone::{compose_transf, saturate, Transf};
use crate::terms::{Node, RankedAlphabet, RankedSymbol, SymbolId, Tree, TreeTuple};

/// Boolean combination applied to two automata on a common alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersection,
    Difference,
}

/// A complete deterministic bottom-up tree automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfta {
    alphabet: Arc<RankedAlphabet>,
    states: Vec<String>,
    /// per symbol, a total table Q^r -> Q, row-major (first argument most
    /// significant) in state order
    tables: Vec<Vec<u32>>,
    finals: BTreeSet<u32>,
}

fn is_state_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Dfta {
    pub fn new(
        alphabet: Arc<RankedAlphabet>,
        states: Vec<String>,
        tables: Vec<Vec<u32>>,
        finals: BTreeSet<u32>,
    ) -> Result<Dfta> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "automaton needs at least one state".into(),
            ));
        }
        for (i, s) in states.iter().enumerate() {
            if !is_state_name(s) {
                return Err(Error::InvalidParameter(format!(
                    "state name {:?} is not an identifier",
                    s
                )));
            }
            if states[..i].iter().any(|t| t == s) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate state name {:?}",
                    s
                )));
            }
        }
        if tables.len() != alphabet.len() {
            return Err(Error::InvalidParameter(
                "one transition table per symbol required".into(),
            ));
        }
        for (sym, table) in alphabet.ids().zip(tables.iter()) {
            let expect = n.pow(alphabet.rank(sym) as u32);
            if table.len() != expect {
                return Err(Error::InvalidParameter(format!(
                    "table for {} has {} entries, expected {}",
                    alphabet.name(sym),
                    table.len(),
                    expect
                )));
            }
            if table.iter().any(|&q| q as usize >= n) {
                return Err(Error::InvalidParameter(format!(
                    "table for {} targets an unknown state",
                    alphabet.name(sym)
                )));
            }
        }
        if finals.iter().any(|&q| q as usize >= n) {
            return Err(Error::InvalidParameter("final state out of range".into()));
        }
        Ok(Dfta {
            alphabet,
            states,
            tables,
            finals,
        })
    }

    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: u32) -> &str {
        &self.states[q as usize]
    }

    pub fn finals(&self) -> &BTreeSet<u32> {
        &self.finals
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals.contains(&q)
    }

    pub fn table(&self, sym: SymbolId) -> &[u32] {
        &self.tables[sym.0]
    }

    /// The action of a letter as a transformation of the state set.
    pub fn letter_transf(&self, sym: SymbolId) -> Transf {
        Transf {
            carrier: self.states.len(),
            rank: self.alphabet.rank(sym),
            table: self.tables[sym.0].clone(),
            proper: true,
        }
    }

    fn check_tree(&self, t: &Tree) -> Result<()> {
        if t.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch(
                "tree alphabet differs from automaton alphabet".into(),
            ));
        }
        Ok(())
    }

    /// Bottom-up evaluation of a ground tree.
    pub fn evaluate(&self, t: &Tree) -> Result<u32> {
        self.check_tree(t)?;
        if t.rank() != 0 {
            return Err(Error::Arity {
                expected: 0,
                got: t.rank(),
            });
        }
        fn eval(a: &Dfta, node: &Node) -> u32 {
            match node {
                Node::Var(_) => unreachable!("ground tree has no variables"),
                Node::Sym(sym, children) => {
                    let n = a.states.len();
                    let mut idx = 0usize;
                    for c in children {
                        idx = idx * n + eval(a, c) as usize;
                    }
                    a.tables[sym.0][idx]
                }
            }
        }
        Ok(eval(self, t.root()))
    }

    pub fn accepts(&self, t: &Tree) -> Result<bool> {
        Ok(self.is_final(self.evaluate(t)?))
    }

    /// Evaluation of a tree with variables to the transformation it denotes:
    /// the table sending each state tuple to the value of the tree with the
    /// variables bound to it. Computed compositionally, so it is a morphism
    /// from trees to transformations; at rank 0 it agrees with `evaluate`.
    pub fn tau_eval(&self, t: &Tree) -> Result<Transf> {
        self.check_tree(t)?;
        fn eval(a: &Dfta, node: &Node) -> Result<Transf> {
            match node {
                Node::Var(_) => Ok(Transf::identity(a.states.len())),
                Node::Sym(sym, children) => {
                    let parts: Vec<Transf> =
                        children.iter().map(|c| eval(a, c)).collect::<Result<_>>()?;
                    let refs: Vec<&Transf> = parts.iter().collect();
                    compose_transf(&a.letter_transf(*sym), &refs)
                }
            }
        }
        eval(self, t.root())
    }

    pub fn tau_eval_tuple(&self, v: &TreeTuple) -> Result<Vec<Transf>> {
        v.components().iter().map(|t| self.tau_eval(t)).collect()
    }

    pub fn reachable(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut reach = vec![false; n];
        loop {
            let mut changed = false;
            for sym in self.alphabet.ids() {
                let r = self.alphabet.rank(sym);
                let table = &self.tables[sym.0];
                let mut idxs = vec![0usize; r];
                let mut row = 0usize;
                loop {
                    if idxs.iter().all(|&q| reach[q]) {
                        let target = table[row] as usize;
                        if !reach[target] {
                            reach[target] = true;
                            changed = true;
                        }
                    }
                    row += 1;
                    let mut pos = r;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        idxs[pos] += 1;
                        if idxs[pos] < n {
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
            if !changed {
                return reach;
            }
        }
    }

    /// True iff no reachable state is final.
    pub fn is_empty(&self) -> bool {
        let reach = self.reachable();
        !self.finals.iter().any(|&q| reach[q as usize])
    }

    /// Product automaton with finals combined per the operation.
    pub fn boolean_op(op: BoolOp, a: &Dfta, b: &Dfta) -> Result<Dfta> {
        if a.alphabet != b.alphabet {
            return Err(Error::AlphabetMismatch(
                "boolean operations require identical alphabets".into(),
            ));
        }
        let na = a.states.len();
        let nb = b.states.len();
        let n = na * nb;
        let states: Vec<String> = (0..n).map(|i| format!("q{}", i)).collect();
        let mut tables = Vec::with_capacity(a.tables.len());
        for sym in a.alphabet.ids() {
            let r = a.alphabet.rank(sym);
            let size = n.pow(r as u32);
            let mut table = Vec::with_capacity(size);
            for row in 0..size {
                // decode pair digits, build row indices in both automata
                let mut digits = vec![0usize; r];
                let mut rest = row;
                for pos in (0..r).rev() {
                    digits[pos] = rest % n;
                    rest /= n;
                }
                let mut row_a = 0usize;
                let mut row_b = 0usize;
                for &d in &digits {
                    row_a = row_a * na + d / nb;
                    row_b = row_b * nb + d % nb;
                }
                let qa = a.tables[sym.0][row_a] as usize;
                let qb = b.tables[sym.0][row_b] as usize;
                table.push((qa * nb + qb) as u32);
            }
            tables.push(table);
        }
        let mut finals = BTreeSet::new();
        for qa in 0..na {
            for qb in 0..nb {
                let fa = a.finals.contains(&(qa as u32));
                let fb = b.finals.contains(&(qb as u32));
                let fin = match op {
                    BoolOp::Union => fa || fb,
                    BoolOp::Intersection => fa && fb,
                    BoolOp::Difference => fa && !fb,
                };
                if fin {
                    finals.insert((qa * nb + qb) as u32);
                }
            }
        }
        Dfta::new(a.alphabet.clone(), states, tables, finals)
    }

    pub fn complement(&self) -> Dfta {
        let finals: BTreeSet<u32> = (0..self.states.len() as u32)
            .filter(|q| !self.finals.contains(q))
            .collect();
        Dfta {
            alphabet: self.alphabet.clone(),
            states: self.states.clone(),
            tables: self.tables.clone(),
            finals,
        }
    }

    /// The minimal automaton of the language: restrict to reachable states,
    /// refine by distinguishability, and rename states canonically by first
    /// occurrence along the size-then-lexicographic enumeration of trees.
    pub fn minimize(&self) -> Dfta {
        let reach = self.reachable();
        let reachable: Vec<usize> = (0..self.states.len()).filter(|&q| reach[q]).collect();
        if reachable.is_empty() {
            // no ground trees at all: a single rejecting sink
            let states = vec!["q0".to_owned()];
            let tables = self
                .alphabet
                .ids()
                .map(|sym| vec![0u32; 1usize.pow(self.alphabet.rank(sym) as u32)])
                .collect();
            return Dfta::new(self.alphabet.clone(), states, tables, BTreeSet::new()).unwrap();
        }
        // dense reindexing of the reachable part
        let mut dense = vec![usize::MAX; self.states.len()];
        for (i, &q) in reachable.iter().enumerate() {
            dense[q] = i;
        }
        let n = reachable.len();
        // Moore refinement: split classes by transition behavior in every
        // argument position against every co-argument tuple of reachable states
        let mut class: Vec<usize> = reachable
            .iter()
            .map(|&q| usize::from(self.finals.contains(&(q as u32))))
            .collect();
        loop {
            let mut signatures: Vec<Vec<usize>> = vec![Vec::new(); n];
            for sym in self.alphabet.ids() {
                let r = self.alphabet.rank(sym);
                if r == 0 {
                    continue;
                }
                let table = &self.tables[sym.0];
                // co-argument tuples over reachable states
                let mut co = vec![0usize; r - 1];
                loop {
                    for pos in 0..r {
                        for i in 0..n {
                            // build full argument tuple with state i at pos
                            let mut row = 0usize;
                            let mut ci = 0;
                            for slot in 0..r {
                                let q = if slot == pos {
                                    reachable[i]
                                } else {
                                    let q = reachable[co[ci]];
                                    ci += 1;
                                    q
                                };
                                row = row * self.states.len() + q;
                            }
                            let target = table[row] as usize;
                            signatures[i].push(class[dense[target]]);
                        }
                    }
                    let mut pos = r - 1;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        co[pos] += 1;
                        if co[pos] < n {
                            break;
                        }
                        co[pos] = 0;
                        if pos == 0 {
                            pos = usize::MAX;
                            break;
                        }
                    }
                    if pos == usize::MAX || r == 1 {
                        break;
                    }
                }
            }
            // regroup by (old class, signature); refinement only ever splits,
            // so an unchanged class count means a fixpoint
            let mut reps: Vec<usize> = Vec::new();
            let mut new_class = vec![0usize; n];
            for i in 0..n {
                match reps
                    .iter()
                    .position(|&r| class[r] == class[i] && signatures[r] == signatures[i])
                {
                    Some(c) => new_class[i] = c,
                    None => {
                        new_class[i] = reps.len();
                        reps.push(i);
                    }
                }
            }
            let old_count = class.iter().copied().collect::<BTreeSet<_>>().len();
            let stable = reps.len() == old_count;
            class = new_class;
            if stable {
                break;
            }
        }
        // quotient automaton over classes
        let class_count = class.iter().copied().collect::<BTreeSet<_>>().len();
        let rep_of_class: Vec<usize> = (0..class_count)
            .map(|c| (0..n).find(|&i| class[i] == c).unwrap())
            .collect();
        let mut q_tables: Vec<Vec<u32>> = Vec::with_capacity(self.alphabet.len());
        for sym in self.alphabet.ids() {
            let r = self.alphabet.rank(sym);
            let size = class_count.pow(r as u32);
            let mut table = Vec::with_capacity(size);
            for row in 0..size {
                let mut digits = vec![0usize; r];
                let mut rest = row;
                for pos in (0..r).rev() {
                    digits[pos] = rest % class_count;
                    rest /= class_count;
                }
                let mut orig_row = 0usize;
                for &d in &digits {
                    orig_row = orig_row * self.states.len() + reachable[rep_of_class[d]];
                }
                let target = self.tables[sym.0][orig_row] as usize;
                table.push(class[dense[target]] as u32);
            }
            q_tables.push(table);
        }
        let q_finals: BTreeSet<u32> = (0..class_count as u32)
            .filter(|&c| {
                self.finals
                    .contains(&(reachable[rep_of_class[c as usize]] as u32))
            })
            .collect();
        let quotient = Dfta {
            alphabet: self.alphabet.clone(),
            states: (0..class_count).map(|c| format!("c{}", c)).collect(),
            tables: q_tables,
            finals: q_finals,
        };
        quotient.canonical_rename()
    }

    /// Renames states by first occurrence along the canonical enumeration of
    /// ground trees (size, then symbol order, then children left to right).
    /// Every state must be reachable.
    fn canonical_rename(&self) -> Dfta {
        let order = self.canonical_state_order();
        let mut position = vec![0u32; order.len()];
        for (new_idx, &q) in order.iter().enumerate() {
            position[q] = new_idx as u32;
        }
        let n = self.states.len();
        let mut tables = Vec::with_capacity(self.tables.len());
        for sym in self.alphabet.ids() {
            let r = self.alphabet.rank(sym);
            let size = n.pow(r as u32);
            let mut table = vec![0u32; size];
            for new_row in 0..size {
                let mut digits = vec![0usize; r];
                let mut rest = new_row;
                for pos in (0..r).rev() {
                    digits[pos] = rest % n;
                    rest /= n;
                }
                let mut old_row = 0usize;
                for &d in &digits {
                    old_row = old_row * n + order[d];
                }
                table[new_row] = position[self.tables[sym.0][old_row] as usize];
            }
            tables.push(table);
        }
        let finals = self.finals.iter().map(|&q| position[q as usize]).collect();
        Dfta {
            alphabet: self.alphabet.clone(),
            states: (0..n).map(|i| format!("q{}", i)).collect(),
            tables,
            finals,
        }
    }

    /// States ordered by their canonically smallest ground witness tree.
    fn canonical_state_order(&self) -> Vec<usize> {
        let n = self.states.len();
        let mut witness: Vec<Option<Node>> = vec![None; n];
        loop {
            let mut changed = false;
            for sym in self.alphabet.ids() {
                let r = self.alphabet.rank(sym);
                let table = &self.tables[sym.0];
                let mut idxs = vec![0usize; r];
                loop {
                    if idxs.iter().all(|&q| witness[q].is_some()) {
                        let mut row = 0usize;
                        for &q in &idxs {
                            row = row * n + q;
                        }
                        let target = table[row] as usize;
                        let cand = Node::Sym(
                            sym,
                            idxs.iter().map(|&q| witness[q].clone().unwrap()).collect(),
                        );
                        let better = match &witness[target] {
                            None => true,
                            Some(cur) => cand.canonical_cmp(cur) == std::cmp::Ordering::Less,
                        };
                        if better {
                            witness[target] = Some(cand);
                            changed = true;
                        }
                    }
                    let mut pos = r;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        idxs[pos] += 1;
                        if idxs[pos] < n {
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
            if !changed {
                break;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| match (&witness[a], &witness[b]) {
            (Some(wa), Some(wb)) => wa.canonical_cmp(wb),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.cmp(&b),
        });
        order
    }

    /// Line-oriented automaton file format; `#` starts a comment.
    pub fn parse(text: &str, context: &str) -> Result<Dfta> {
        let err = |msg: String, line: usize| Error::Parse(ParseError::new(context, msg, line, 1));
        let mut alphabet_line: Option<(Vec<(String, usize)>, usize)> = None;
        let mut states_line: Option<(Vec<String>, usize)> = None;
        let mut final_line: Option<(Vec<String>, usize)> = None;
        let mut trans_lines: Vec<(String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("alphabet:") {
                let mut pairs = Vec::new();
                for tok in rest.split_whitespace() {
                    let (name, rank) = tok.split_once('/').ok_or_else(|| {
                        err(format!("expected name/rank, found {:?}", tok), lineno)
                    })?;
                    let rank: usize = rank
                        .parse()
                        .map_err(|_| err(format!("bad rank in {:?}", tok), lineno))?;
                    pairs.push((name.to_owned(), rank));
                }
                alphabet_line = Some((pairs, lineno));
            } else if let Some(rest) = line.strip_prefix("states:") {
                states_line = Some((rest.split_whitespace().map(str::to_owned).collect(), lineno));
            } else if let Some(rest) = line.strip_prefix("final:") {
                final_line = Some((rest.split_whitespace().map(str::to_owned).collect(), lineno));
            } else if let Some(rest) = line.strip_prefix("trans:") {
                trans_lines.push((rest.trim().to_owned(), lineno));
            } else {
                return Err(err(format!("unrecognized line {:?}", line), lineno));
            }
        }
        let (pairs, al) = alphabet_line.ok_or_else(|| err("missing alphabet: line".into(), 1))?;
        let alphabet = RankedAlphabet::new(
            pairs
                .iter()
                .map(|(n, r)| RankedSymbol {
                    name: n.clone(),
                    rank: *r,
                })
                .collect(),
        )
        .map_err(|e| err(format!("bad alphabet: {}", e), al))?;
        let (states, sl) = states_line.ok_or_else(|| err("missing states: line".into(), 1))?;
        if states.is_empty() {
            return Err(err("states: line lists no states".into(), sl));
        }
        let state_idx = |name: &str, lineno: usize| -> Result<u32> {
            states
                .iter()
                .position(|s| s == name)
                .map(|i| i as u32)
                .ok_or_else(|| err(format!("unknown state {:?}", name), lineno))
        };
        let (finals_names, fl) = final_line.ok_or_else(|| err("missing final: line".into(), 1))?;
        let mut finals = BTreeSet::new();
        for f in &finals_names {
            finals.insert(state_idx(f, fl)?);
        }
        let n = states.len();
        let mut tables: Vec<Vec<Option<u32>>> = alphabet
            .ids()
            .map(|sym| vec![None; n.pow(alphabet.rank(sym) as u32)])
            .collect();
        for (line, lineno) in &trans_lines {
            // sym(q1,...,qr) -> q
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| err(format!("expected '->' in {:?}", line), *lineno))?;
            let target = state_idx(rhs.trim(), *lineno)?;
            let lhs = lhs.trim();
            let (name, args) = match lhs.split_once('(') {
                Some((name, rest)) => {
                    let inner = rest
                        .strip_suffix(')')
                        .ok_or_else(|| err(format!("unclosed '(' in {:?}", line), *lineno))?;
                    let args: Vec<&str> = if inner.trim().is_empty() {
                        Vec::new()
                    } else {
                        inner.split(',').map(str::trim).collect()
                    };
                    (name.trim(), args)
                }
                None => (lhs, Vec::new()),
            };
            let sym = alphabet
                .lookup(name)
                .ok_or_else(|| err(format!("unknown symbol {:?}", name), *lineno))?;
            let r = alphabet.rank(sym);
            if args.len() != r {
                return Err(err(
                    format!("{} takes {} arguments, found {}", name, r, args.len()),
                    *lineno,
                ));
            }
            let mut row = 0usize;
            for a in &args {
                row = row * n + state_idx(a, *lineno)? as usize;
            }
            if tables[sym.0][row].is_some() {
                return Err(err(format!("duplicate transition {:?}", line), *lineno));
            }
            tables[sym.0][row] = Some(target);
        }
        let mut full = Vec::with_capacity(tables.len());
        for (sym, table) in alphabet.ids().zip(tables) {
            let mut rows = Vec::with_capacity(table.len());
            for (row, entry) in table.into_iter().enumerate() {
                match entry {
                    Some(q) => rows.push(q),
                    None => {
                        return Err(err(
                            format!(
                            "missing transition for {} (row {}); the automaton must be complete",
                            alphabet.name(sym),
                            row
                        ),
                            1,
                        ))
                    }
                }
            }
            full.push(rows);
        }
        Dfta::new(alphabet, states, full, finals)
    }
}

impl fmt::Display for Dfta {
    /// Canonical file form: alphabet, states, finals, then one transition per
    /// line, symbols in alphabet order and argument tuples row-major.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alphabet:")?;
        for s in self.alphabet.symbols() {
            write!(f, " {}/{}", s.name, s.rank)?;
        }
        writeln!(f)?;
        writeln!(f, "states: {}", self.states.join(" "))?;
        write!(f, "final:")?;
        for q in &self.finals {
            write!(f, " {}", self.states[*q as usize])?;
        }
        writeln!(f)?;
        let n = self.states.len();
        for sym in self.alphabet.ids() {
            let r = self.alphabet.rank(sym);
            let size = n.pow(r as u32);
            for row in 0..size {
                let mut digits = vec![0usize; r];
                let mut rest = row;
                for pos in (0..r).rev() {
                    digits[pos] = rest % n;
                    rest /= n;
                }
                let args: Vec<&str> = digits.iter().map(|&d| self.states[d].as_str()).collect();
                writeln!(
                    f,
                    "trans: {}({}) -> {}",
                    self.alphabet.name(sym),
                    args.join(","),
                    self.states[self.tables[sym.0][row] as usize]
                )?;
            }
        }
        Ok(())
    }
}

/// Evaluates many ground trees; parallel when the `parallel` feature is on.
pub fn evaluate_batch(a: &Dfta, trees: &[Tree]) -> Result<Vec<u32>> {
    crate::par::map_collect(trees, |t| a.evaluate(t))
}

/// Sequential twin of [`evaluate_batch`], kept for comparison benchmarks.
pub fn evaluate_batch_seq(a: &Dfta, trees: &[Tree]) -> Result<Vec<u32>> {
    trees.iter().map(|t| a.evaluate(t)).collect()
}

/// A recognizable language of rank n over a fixed automaton: the accepting
/// subset of the reachable rank-n transformations, stored explicitly so
/// emptiness and equality are finite set comparisons.
#[derive(Debug, Clone)]
pub struct RecLang {
    pub dfta: Arc<Dfta>,
    pub rank: usize,
    pub accepting: BTreeSet<Vec<u32>>,
}

impl RecLang {
    /// The rank-0 language of the automaton: accepting set = reachable final
    /// constants.
    pub fn of_automaton(dfta: Arc<Dfta>) -> RecLang {
        let reach = dfta.reachable();
        let accepting = dfta
            .finals()
            .iter()
            .filter(|&&q| reach[q as usize])
            .map(|&q| vec![q])
            .collect();
        RecLang {
            dfta,
            rank: 0,
            accepting,
        }
    }

    pub fn member(&self, t: &Tree) -> Result<bool> {
        if t.rank() != self.rank {
            return Err(Error::Arity {
                expected: self.rank,
                got: t.rank(),
            });
        }
        let transf = self.dfta.tau_eval(t)?;
        Ok(self.accepting.contains(&transf.table))
    }

    pub fn complement(&self) -> Result<RecLang> {
        let sat = saturate(&self.dfta, self.rank)?;
        let accepting = sat.preclone.levels[self.rank]
            .iter()
            .filter(|e| !self.accepting.contains(&e.transf.table))
            .map(|e| e.transf.table.clone())
            .collect();
        Ok(RecLang {
            dfta: self.dfta.clone(),
            rank: self.rank,
            accepting,
        })
    }

    /// `(u,k1,k2)^{-1} L`: the rank-(rank - k1 - k2) language of trees t with
    /// `u.(1^k1 + t + 1^k2)` in L, computed by filtering the saturated
    /// reachable set at the result rank.
    pub fn left_quotient(&self, u: &Tree, k1: usize, k2: usize) -> Result<RecLang> {
        if u.rank() != k1 + 1 + k2 {
            return Err(Error::Arity {
                expected: k1 + 1 + k2,
                got: u.rank(),
            });
        }
        if k1 + k2 > self.rank {
            return Err(Error::Arity {
                expected: self.rank,
                got: k1 + k2,
            });
        }
        let m = self.rank - k1 - k2;
        let tau_u = self.dfta.tau_eval(u)?;
        let sat = saturate(&self.dfta, m)?;
        let id = Transf::identity(self.dfta.state_count());
        let mut accepting = BTreeSet::new();
        for e in &sat.preclone.levels[m] {
            let mut parts: Vec<&Transf> = Vec::with_capacity(k1 + 1 + k2);
            for _ in 0..k1 {
                parts.push(&id);
            }
            parts.push(&e.transf);
            for _ in 0..k2 {
                parts.push(&id);
            }
            let composed = compose_transf(&tau_u, &parts)?;
            if self.accepting.contains(&composed.table) {
                accepting.insert(e.transf.table.clone());
            }
        }
        Ok(RecLang {
            dfta: self.dfta.clone(),
            rank: m,
            accepting,
        })
    }

    /// `L v^{-1}`: the rank-n language of trees t with `t.v` in L, where v is
    /// an n-tuple of total rank equal to the rank of L.
    pub fn right_quotient(&self, v: &TreeTuple) -> Result<RecLang> {
        if v.total_rank() != self.rank {
            return Err(Error::Arity {
                expected: self.rank,
                got: v.total_rank(),
            });
        }
        let n = v.len();
        let tau_v = self.dfta.tau_eval_tuple(v)?;
        let refs: Vec<&Transf> = tau_v.iter().collect();
        let sat = saturate(&self.dfta, n)?;
        let mut accepting = BTreeSet::new();
        for e in &sat.preclone.levels[n] {
            let composed = compose_transf(&e.transf, &refs)?;
            if self.accepting.contains(&composed.table) {
                accepting.insert(e.transf.table.clone());
            }
        }
        Ok(RecLang {
            dfta: self.dfta.clone(),
            rank: n,
            accepting,
        })
    }

    /// Equality as subsets of the reachable transformations; requires the
    /// same underlying automaton and rank.
    pub fn lang_equal(&self, other: &RecLang) -> Result<bool> {
        if self.dfta != other.dfta {
            return Err(Error::CarrierMismatch(
                "languages over different automata".into(),
            ));
        }
        if self.rank != other.rank {
            return Err(Error::CarrierMismatch(format!(
                "rank {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(self.accepting == other.accepting)
    }
}

/// Language equality of two automata over a common alphabet, by emptiness of
/// both differences.
pub fn equivalent(a: &Dfta, b: &Dfta) -> Result<bool> {
    Ok(Dfta::boolean_op(BoolOp::Difference, a, b)?.is_empty()
        && Dfta::boolean_op(BoolOp::Difference, b, a)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn evaluate_exists_examples() {
        let a = corpus::build_exists(&corpus::default_delta());
        let alpha = a.alphabet().clone();
        let t = crate::terms::parse_tree("1_0", &alpha).unwrap();
        assert!(a.accepts(&t).unwrap());
        let t = crate::terms::parse_tree("0_2(0_0,0_0)", &alpha).unwrap();
        assert!(!a.accepts(&t).unwrap());
        let t = crate::terms::parse_tree("0_2(0_0,0_2(1_0,0_0))", &alpha).unwrap();
        assert!(a.accepts(&t).unwrap());
    }

    #[test]
    fn evaluate_rejects_foreign_trees() {
        let a = corpus::build_exists(&corpus::default_delta());
        let other = RankedAlphabet::from_pairs(&[("x", 0)]).unwrap();
        let t = crate::terms::parse_tree("x", &other).unwrap();
        assert!(matches!(a.evaluate(&t), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn tau_eval_of_unit_is_identity() {
        let a = corpus::build_exists(&corpus::default_delta());
        let unit = Tree::unit(a.alphabet().clone());
        let tr = a.tau_eval(&unit).unwrap();
        assert!(tr.is_identity());
    }

    #[test]
    fn tau_eval_constant_example() {
        let a = corpus::build_exists(&corpus::default_delta());
        let t = crate::terms::parse_tree("0_2(v1,1_0)", &a.alphabet().clone()).unwrap();
        let tr = a.tau_eval(&t).unwrap();
        // contains 1_0, so constantly the accepting state
        assert_eq!(tr.rank, 1);
        let qt = a
            .evaluate(&crate::terms::parse_tree("1_0", &a.alphabet().clone()).unwrap())
            .unwrap();
        assert!(tr.table.iter().all(|&v| v == qt));
    }

    #[test]
    fn parse_print_round_trip() {
        let a = corpus::build_exists(&corpus::default_delta());
        let text = a.to_string();
        let b = Dfta::parse(&text, "round-trip").unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_string(), text);
    }

    #[test]
    fn parse_reports_incomplete_tables() {
        let text = "alphabet: a/0 f/1\nstates: p q\nfinal: q\ntrans: a() -> p\ntrans: f(p) -> q\n";
        let err = Dfta::parse(text, "incomplete").unwrap_err();
        assert!(err.to_string().contains("missing transition"), "{}", err);
    }

    #[test]
    fn parse_rejects_duplicate_transitions() {
        let text = "alphabet: a/0\nstates: p\nfinal:\ntrans: a() -> p\ntrans: a() -> p\n";
        assert!(Dfta::parse(text, "dup").is_err());
    }

    #[test]
    fn intersection_with_complement_is_empty() {
        let a = corpus::build_exists(&corpus::default_delta());
        let both = Dfta::boolean_op(BoolOp::Intersection, &a, &a.complement()).unwrap();
        assert!(both.is_empty());
    }

    #[test]
    fn union_of_residues_is_everything() {
        let delta = corpus::default_delta();
        let a0 = corpus::build_modcount(&delta, 2, 0).unwrap();
        let a1 = corpus::build_modcount(&delta, 2, 1).unwrap();
        let u = Dfta::boolean_op(BoolOp::Union, &a0, &a1).unwrap();
        assert!(u.complement().is_empty());
    }

    #[test]
    fn boolean_requires_same_alphabet() {
        let a = corpus::build_exists(&corpus::default_delta());
        let other = corpus::boolean_alphabet(&[0, 2, 3]).unwrap();
        let b = corpus::build_exists(&other);
        assert!(matches!(
            Dfta::boolean_op(BoolOp::Union, &a, &b),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn minimize_collapses_duplicated_state() {
        let a = corpus::build_exists(&corpus::default_delta());
        let dup = corpus::randomized_variant(&a, 7);
        assert!(dup.state_count() > 2);
        let min = dup.minimize();
        assert_eq!(min.state_count(), 2);
        assert!(equivalent(&min, &a).unwrap());
    }

    #[test]
    fn minimize_is_idempotent_and_canonical() {
        let a = corpus::build_exists(&corpus::default_delta());
        let m1 = a.minimize();
        let m2 = m1.minimize();
        assert_eq!(m1, m2);
        // canonical: variants minimize to the identical automaton
        for seed in [1u64, 2, 3] {
            let v = corpus::randomized_variant(&a, seed).minimize();
            assert_eq!(v, m1);
        }
    }

    #[test]
    fn minimize_modcount_keeps_residue_classes() {
        let delta = corpus::default_delta();
        for p in [2usize, 3] {
            let a = corpus::build_modcount(&delta, p, 0).unwrap();
            assert_eq!(a.minimize().state_count(), p);
        }
    }

    #[test]
    fn minimize_handles_empty_tree_set() {
        // no nullary symbols: no ground trees, one rejecting sink
        let alpha = RankedAlphabet::from_pairs(&[("f", 1)]).unwrap();
        let a = Dfta::new(
            alpha,
            vec!["p".into(), "q".into()],
            vec![vec![1, 0]],
            BTreeSet::from([1]),
        )
        .unwrap();
        let m = a.minimize();
        assert_eq!(m.state_count(), 1);
        assert!(m.finals().is_empty());
    }

    #[test]
    fn left_quotient_by_unit_is_identity() {
        let a = Arc::new(corpus::build_exists(&corpus::default_delta()));
        let lang = RecLang::of_automaton(a.clone());
        let unit = Tree::unit(a.alphabet().clone());
        let q = lang.left_quotient(&unit, 0, 0).unwrap();
        assert!(q.lang_equal(&lang).unwrap());
    }

    #[test]
    fn left_quotient_by_context_containing_one_accepts_everything() {
        let a = Arc::new(corpus::build_exists(&corpus::default_delta()));
        let alpha = a.alphabet().clone();
        let lang = RecLang::of_automaton(a.clone());
        let u = crate::terms::parse_tree("0_2(v1,1_0)", &alpha).unwrap();
        let q = lang.left_quotient(&u, 0, 0).unwrap();
        let full = RecLang::of_automaton(a.clone())
            .complement()
            .unwrap()
            .complement()
            .unwrap();
        // the quotient accepts every reachable constant
        let sat = saturate(&a, 0).unwrap();
        assert_eq!(q.accepting.len(), sat.preclone.levels[0].len());
        drop(full);
    }

    #[test]
    fn right_quotient_by_one_leaf_accepts_all_unary() {
        let a = Arc::new(corpus::build_exists(&corpus::default_delta()));
        let alpha = a.alphabet().clone();
        let lang = RecLang::of_automaton(a.clone());
        let v = TreeTuple::new(vec![crate::terms::parse_tree("1_0", &alpha).unwrap()]);
        let q = lang.right_quotient(&v).unwrap();
        let sat = saturate(&a, 1).unwrap();
        assert_eq!(q.rank, 1);
        assert_eq!(q.accepting.len(), sat.preclone.levels[1].len());
    }

    #[test]
    fn lang_equal_basics() {
        let a = Arc::new(corpus::build_exists(&corpus::default_delta()));
        let lang = RecLang::of_automaton(a.clone());
        assert!(lang.lang_equal(&lang).unwrap());
        let co = lang.complement().unwrap();
        assert!(!lang.lang_equal(&co).unwrap());
        let co2 = co.complement().unwrap();
        assert!(lang.lang_equal(&co2).unwrap());
    }

    #[test]
    fn quotient_membership_matches_direct_evaluation() {
        let a = Arc::new(corpus::build_exists(&corpus::default_delta()));
        let alpha = a.alphabet().clone();
        let lang = RecLang::of_automaton(a.clone());
        let u = crate::terms::parse_tree("0_2(0_0,v1)", &alpha).unwrap();
        let q = lang.left_quotient(&u, 0, 0).unwrap();
        for text in ["0_0", "1_0", "0_2(0_0,1_0)", "0_2(0_0,0_0)"] {
            let t = crate::terms::parse_tree(text, &alpha).unwrap();
            let composed =
                crate::terms::compose_trees(&u, &TreeTuple::new(vec![t.clone()])).unwrap();
            assert_eq!(
                q.member(&t).unwrap(),
                lang.member(&composed).unwrap(),
                "tree {}",
                text
            );
        }
    }
}
