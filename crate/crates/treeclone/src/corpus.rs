//! Built-in automata and reference preclones used throughout tests, demos
//! and the CLI.
//!
//! The languages live over a Boolean ranked alphabet: for each arity n in
//! the chosen set, the two symbols `0_n` and `1_n`. The reference preclones
//! are built from closed-form tables, independently of saturation, so the
//! two construction routes can be cross-checked.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::algebra::Dfta;
use crate::error::{Error, Result};
use crate::preclone::{Generator, PgPairTrunc, Transf, TruncBuilder};
use crate::terms::{RankedAlphabet, RankedSymbol, Tree};

/// The Boolean ranked alphabet with symbols `0_n`, `1_n` for each arity in
/// `arities`. Requires arity 0 and some arity >= 2.
pub fn boolean_alphabet(arities: &[usize]) -> Result<Arc<RankedAlphabet>> {
    if !arities.contains(&0) || !arities.iter().any(|&n| n >= 2) {
        return Err(Error::InvalidParameter(
            "a Boolean ranked alphabet needs arity 0 and some arity >= 2".into(),
        ));
    }
    let mut symbols = Vec::new();
    for &n in arities {
        symbols.push(RankedSymbol {
            name: format!("0_{}", n),
            rank: n,
        });
        symbols.push(RankedSymbol {
            name: format!("1_{}", n),
            rank: n,
        });
    }
    RankedAlphabet::new(symbols)
}

/// The smallest Boolean alphabet: arities {0, 2}.
pub fn default_delta() -> Arc<RankedAlphabet> {
    boolean_alphabet(&[0, 2]).expect("default alphabet is well-formed")
}

fn ones_of(alphabet: &RankedAlphabet) -> Vec<bool> {
    alphabet
        .symbols()
        .iter()
        .map(|s| s.name.starts_with("1_"))
        .collect()
}

/// Trees containing at least one 1-labeled vertex. Two states; the letter
/// actions are disjunction for 0-labels and constantly-accepting for
/// 1-labels.
pub fn build_exists(alphabet: &Arc<RankedAlphabet>) -> Dfta {
    let ones = ones_of(alphabet);
    let states = vec!["qF".to_owned(), "qT".to_owned()];
    let tables = alphabet
        .ids()
        .map(|sym| {
            let r = alphabet.rank(sym);
            let size = 2usize.pow(r as u32);
            (0..size)
                .map(|row| {
                    if ones[sym.0] {
                        1
                    } else {
                        // or of the argument bits
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
    Dfta::new(alphabet.clone(), states, tables, BTreeSet::from([1])).unwrap()
}

/// Trees whose number of 1-labeled vertices is congruent to r mod p.
pub fn build_modcount(alphabet: &Arc<RankedAlphabet>, p: usize, r: usize) -> Result<Dfta> {
    if p < 1 || r >= p {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= r < p, got p={} r={}",
            p, r
        )));
    }
    let ones = ones_of(alphabet);
    let states: Vec<String> = (0..p).map(|i| format!("q{}", i)).collect();
    let tables = alphabet
        .ids()
        .map(|sym| {
            let rank = alphabet.rank(sym);
            let size = p.pow(rank as u32);
            (0..size)
                .map(|row| {
                    let mut sum = usize::from(ones[sym.0]);
                    let mut rest = row;
                    for _ in 0..rank {
                        sum += rest % p;
                        rest /= p;
                    }
                    (sum % p) as u32
                })
                .collect()
        })
        .collect();
    Dfta::new(alphabet.clone(), states, tables, BTreeSet::from([r as u32]))
}

/// Trees with at least one maximal root-to-leaf path entirely 1-labeled.
/// 1-leaves accept, 0-labels reject, internal 1-labels take the disjunction
/// of their children.
pub fn build_path(alphabet: &Arc<RankedAlphabet>) -> Dfta {
    let ones = ones_of(alphabet);
    let states = vec!["qF".to_owned(), "qT".to_owned()];
    let tables = alphabet
        .ids()
        .map(|sym| {
            let r = alphabet.rank(sym);
            let size = 2usize.pow(r as u32);
            (0..size)
                .map(|row| {
                    if !ones[sym.0] {
                        0
                    } else if r == 0 {
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
    Dfta::new(alphabet.clone(), states, tables, BTreeSet::from([1])).unwrap()
}

/// Trees of depth at least two whose root children are all 1-labeled.
/// States are pairs (all children of the root 1-labeled, root 1-labeled),
/// in the order ff, ft, tf, tt; accepting iff the first component holds,
/// which forces an inner root and hence depth at least two.
pub fn build_next(alphabet: &Arc<RankedAlphabet>) -> Dfta {
    let ones = ones_of(alphabet);
    let states = vec![
        "ff".to_owned(),
        "ft".to_owned(),
        "tf".to_owned(),
        "tt".to_owned(),
    ];
    // state encoding: index = 2*first + second
    let tables = alphabet
        .ids()
        .map(|sym| {
            let r = alphabet.rank(sym);
            let size = 4usize.pow(r as u32);
            (0..size)
                .map(|row| {
                    let second = u32::from(ones[sym.0]);
                    if r == 0 {
                        // leaves have no children: first component is false
                        second
                    } else {
                        let mut all_children_one = 1u32;
                        let mut rest = row;
                        for _ in 0..r {
                            let child = rest % 4;
                            all_children_one &= (child % 2) as u32;
                            rest /= 4;
                        }
                        2 * all_children_one + second
                    }
                })
                .collect()
        })
        .collect();
    Dfta::new(alphabet.clone(), states, tables, BTreeSet::from([2, 3])).unwrap()
}

/// Trees whose root is 1-labeled; membership depends only on depth 0.
pub fn build_root1(alphabet: &Arc<RankedAlphabet>) -> Dfta {
    let ones = ones_of(alphabet);
    let states = vec!["r0".to_owned(), "r1".to_owned()];
    let tables = alphabet
        .ids()
        .map(|sym| {
            let r = alphabet.rank(sym);
            let size = 2usize.pow(r as u32);
            vec![u32::from(ones[sym.0]); size]
        })
        .collect();
    Dfta::new(alphabet.clone(), states, tables, BTreeSet::from([1])).unwrap()
}

/// Which reference preclone to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefPreclone {
    /// Rank-n elements: n-ary or, n-ary constant true.
    Exists,
    /// Rank-n elements: argument sum plus r, mod p.
    ModP(usize),
    /// Rank-n elements: argument sum plus r, mod p threshold q.
    ModThreshold(usize, usize),
    /// Rank-n elements: constants true/false and partial disjunctions.
    Path,
}

/// Sum collapsed modulo p threshold q: counts up to q-1 exactly, then
/// cycles with period p.
fn collapse(sum: usize, p: usize, q: usize) -> u32 {
    if sum < q {
        sum as u32
    } else {
        (q + (sum - q) % p) as u32
    }
}

/// Builds a reference truncation from closed-form element tables (not by
/// saturation), with the letter map of the corresponding language. The
/// closure pass afterwards only validates that the listed levels are
/// already closed.
pub fn build_reference_preclone(
    which: RefPreclone,
    alphabet: &Arc<RankedAlphabet>,
    rank_cap: usize,
) -> Result<PgPairTrunc> {
    let ones = ones_of(alphabet);
    let (carrier, letter_table): (usize, Box<dyn Fn(usize, bool) -> Vec<u32>>) = match which {
        RefPreclone::Exists => (2, {
            Box::new(|rank, one| {
                let size = 2usize.pow(rank as u32);
                (0..size)
                    .map(|row| {
                        if one {
                            1
                        } else {
                            let mut any = 0u32;
                            let mut rest = row;
                            for _ in 0..rank {
                                any |= (rest % 2) as u32;
                                rest /= 2;
                            }
                            any
                        }
                    })
                    .collect()
            })
        }),
        RefPreclone::ModP(p) => {
            if p < 2 {
                return Err(Error::InvalidParameter("modulus must be at least 2".into()));
            }
            (p, {
                Box::new(move |rank, one| {
                    let size = p.pow(rank as u32);
                    (0..size)
                        .map(|row| {
                            let mut sum = usize::from(one);
                            let mut rest = row;
                            for _ in 0..rank {
                                sum += rest % p;
                                rest /= p;
                            }
                            (sum % p) as u32
                        })
                        .collect()
                })
            })
        }
        RefPreclone::ModThreshold(p, q) => {
            if p < 1 {
                return Err(Error::InvalidParameter("modulus must be at least 1".into()));
            }
            let c = p + q;
            (c, {
                Box::new(move |rank, one| {
                    let size = c.pow(rank as u32);
                    (0..size)
                        .map(|row| {
                            let mut sum = usize::from(one);
                            let mut rest = row;
                            for _ in 0..rank {
                                sum += rest % c;
                                rest /= c;
                            }
                            collapse(sum, p, q)
                        })
                        .collect()
                })
            })
        }
        RefPreclone::Path => (2, {
            Box::new(|rank, one| {
                let size = 2usize.pow(rank as u32);
                (0..size)
                    .map(|row| {
                        if !one {
                            0
                        } else if rank == 0 {
                            1
                        } else {
                            let mut any = 0u32;
                            let mut rest = row;
                            for _ in 0..rank {
                                any |= (rest % 2) as u32;
                                rest /= 2;
                            }
                            any
                        }
                    })
                    .collect()
            })
        }),
    };

    let generators: Vec<Generator> = alphabet
        .ids()
        .map(|sym| Generator {
            transf: Transf {
                carrier,
                rank: alphabet.rank(sym),
                table: letter_table(alphabet.rank(sym), ones[sym.0]),
                proper: true,
            },
            witness: Tree::letter(alphabet.clone(), sym),
        })
        .collect();

    let mut builder = TruncBuilder::new(alphabet.clone(), carrier, rank_cap, generators, 10_000);
    for rank in 0..=rank_cap {
        let size = carrier.pow(rank as u32);
        match which {
            RefPreclone::Exists => {
                // or_rank and true_rank
                let or: Vec<u32> = (0..size)
                    .map(|row| {
                        let mut any = 0u32;
                        let mut rest = row;
                        for _ in 0..rank {
                            any |= (rest % 2) as u32;
                            rest /= 2;
                        }
                        any
                    })
                    .collect();
                builder.insert_reference(rank, or);
                builder.insert_reference(rank, vec![1; size]);
            }
            RefPreclone::ModP(p) => {
                for r in 0..p {
                    let table: Vec<u32> = (0..size)
                        .map(|row| {
                            let mut sum = r;
                            let mut rest = row;
                            for _ in 0..rank {
                                sum += rest % p;
                                rest /= p;
                            }
                            (sum % p) as u32
                        })
                        .collect();
                    builder.insert_reference(rank, table);
                }
            }
            RefPreclone::ModThreshold(p, q) => {
                for r in 0..p + q {
                    let table: Vec<u32> = (0..size)
                        .map(|row| {
                            let mut sum = r;
                            let mut rest = row;
                            for _ in 0..rank {
                                sum += rest % (p + q);
                                rest /= p + q;
                            }
                            collapse(sum, p, q)
                        })
                        .collect();
                    builder.insert_reference(rank, table);
                }
            }
            RefPreclone::Path => {
                builder.insert_reference(rank, vec![0; size]); // false_rank
                builder.insert_reference(rank, vec![1; size]); // true_rank
                                                               // or_P for nonempty P, as bitmask over argument positions
                for mask in 1usize..(1 << rank) {
                    let table: Vec<u32> = (0..size)
                        .map(|row| {
                            let mut any = 0u32;
                            let mut rest = row;
                            for pos in (0..rank).rev() {
                                let bit = (rest % 2) as u32;
                                rest /= 2;
                                if mask & (1 << pos) != 0 {
                                    any |= bit;
                                }
                            }
                            any
                        })
                        .collect();
                    builder.insert_reference(rank, table);
                }
            }
        }
    }
    let grew = builder.close()?;
    if grew {
        return Err(Error::InvalidParameter(
            "reference level listing is not closed under composition".into(),
        ));
    }
    Ok(PgPairTrunc {
        preclone: builder.finish()?,
    })
}

/// A language-preserving, pseudo-random presentation change: duplicates one
/// or two states (redirecting some transitions into the clones) and then
/// permutes the state order. Deterministic in the seed.
pub fn randomized_variant(a: &Dfta, seed: u64) -> Dfta {
    let mut rng = XorShift64::new(seed);
    let mut states: Vec<String> = a.state_names().to_vec();
    let mut tables: Vec<Vec<u32>> = a.alphabet().ids().map(|s| a.table(s).to_vec()).collect();
    let mut finals: BTreeSet<u32> = a.finals().clone();

    let dups = 1 + (rng.next() % 2) as usize;
    for d in 0..dups {
        let n = states.len();
        let q = (rng.next() % n as u64) as usize;
        let clone_idx = n as u32;
        states.push(format!("d{}_{}", d, states[q]));
        let mut new_tables = Vec::with_capacity(tables.len());
        for (sym, table) in a.alphabet().ids().zip(tables.iter()) {
            let r = a.alphabet().rank(sym);
            let new_n = n + 1;
            let size = new_n.pow(r as u32);
            let mut new_table = Vec::with_capacity(size);
            for row in 0..size {
                // project clone -> original to find the old behavior
                let mut digits = vec![0usize; r];
                let mut rest = row;
                for pos in (0..r).rev() {
                    digits[pos] = rest % new_n;
                    rest /= new_n;
                }
                let mut old_row = 0usize;
                for &dgt in &digits {
                    old_row = old_row * n + if dgt == n { q } else { dgt };
                }
                let mut target = table[old_row];
                if target as usize == q && rng.next().is_multiple_of(2) {
                    target = clone_idx;
                }
                new_table.push(target);
            }
            new_tables.push(new_table);
        }
        tables = new_tables;
        if finals.contains(&(q as u32)) {
            finals.insert(clone_idx);
        }
    }

    // random permutation of the state order
    let n = states.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    // position[old] = new
    let mut position = vec![0u32; n];
    for (new_idx, &old) in perm.iter().enumerate() {
        position[old] = new_idx as u32;
    }
    let permuted_states: Vec<String> = perm.iter().map(|&old| states[old].clone()).collect();
    let mut permuted_tables = Vec::with_capacity(tables.len());
    for (sym, table) in a.alphabet().ids().zip(tables.iter()) {
        let r = a.alphabet().rank(sym);
        let size = n.pow(r as u32);
        let mut new_table = vec![0u32; size];
        for new_row in 0..size {
            let mut digits = vec![0usize; r];
            let mut rest = new_row;
            for pos in (0..r).rev() {
                digits[pos] = rest % n;
                rest /= n;
            }
            let mut old_row = 0usize;
            for &dgt in &digits {
                old_row = old_row * n + perm[dgt];
            }
            new_table[new_row] = position[table[old_row] as usize];
        }
        permuted_tables.push(new_table);
    }
    let permuted_finals = finals.iter().map(|&q| position[q as usize]).collect();
    Dfta::new(
        a.alphabet().clone(),
        permuted_states,
        permuted_tables,
        permuted_finals,
    )
    .expect("variant construction preserves well-formedness")
}

pub(crate) struct XorShift64 {
    state: u64,
}

impl XorShift64 {
    pub(crate) fn new(seed: u64) -> Self {
        XorShift64 {
            state: seed.wrapping_mul(2685821657736338717).max(1),
        }
    }

    pub(crate) fn next(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x
    }
}
