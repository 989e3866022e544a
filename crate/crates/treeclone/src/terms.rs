//! Ranked alphabets and trees with variable frontiers.
//!
//! A tree of rank `n` has inner nodes labeled by alphabet symbols (child
//! count = symbol rank) and its variable leaves, read left to right, are
//! exactly `v1 v2 ... vn`. Rank-0 trees are ordinary ground terms.
//! Composition substitutes a tree for each variable and renumbers the
//! variables of the components consecutively, which makes the set of all
//! trees over an alphabet an algebra with the unit tree `v1`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, ParseError, Result};

/// A symbol with a fixed arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedSymbol {
    pub name: String,
    pub rank: usize,
}

/// Index of a symbol in its alphabet. Order is the declaration order and is
/// significant: it fixes every canonical enumeration downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub usize);

/// An ordered list of distinct ranked symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedAlphabet {
    symbols: Vec<RankedSymbol>,
}

/// `v1`, `v2`, ... are reserved; symbol names must not look like variables.
fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    if chars.next() != Some('v') {
        return false;
    }
    let rest = chars.as_str();
    !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) && !rest.starts_with('0')
}

fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl RankedAlphabet {
    pub fn new(symbols: Vec<RankedSymbol>) -> Result<Arc<RankedAlphabet>> {
        for (i, s) in symbols.iter().enumerate() {
            if !is_identifier(&s.name) {
                return Err(Error::InvalidParameter(format!(
                    "symbol name {:?} is not an identifier",
                    s.name
                )));
            }
            if is_variable_name(&s.name) {
                return Err(Error::InvalidParameter(format!(
                    "symbol name {:?} matches the reserved variable pattern",
                    s.name
                )));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate symbol name {:?}",
                    s.name
                )));
            }
        }
        Ok(Arc::new(RankedAlphabet { symbols }))
    }

    /// Convenience constructor from `(name, rank)` pairs.
    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Arc<RankedAlphabet>> {
        RankedAlphabet::new(
            pairs
                .iter()
                .map(|(name, rank)| RankedSymbol {
                    name: (*name).to_owned(),
                    rank: *rank,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[RankedSymbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &RankedSymbol {
        &self.symbols[id.0]
    }

    pub fn rank(&self, id: SymbolId) -> usize {
        self.symbols[id.0].rank
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.0].name
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .map(SymbolId)
    }

    pub fn ids(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len()).map(SymbolId)
    }

    pub fn max_rank(&self) -> usize {
        self.symbols.iter().map(|s| s.rank).max().unwrap_or(0)
    }
}

/// A node of a tree. Variable indices are 1-based and absolute within the
/// whole tree; subtrees of a valid tree are generally not valid trees on
/// their own (their variables need not start at `v1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Sym(SymbolId, Vec<Node>),
    Var(usize),
}

impl Node {
    pub fn size(&self) -> usize {
        match self {
            Node::Var(_) => 1,
            Node::Sym(_, children) => 1 + children.iter().map(Node::size).sum::<usize>(),
        }
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Node::Var(i) => out.push(*i),
            Node::Sym(_, children) => {
                for c in children {
                    c.collect_vars(out);
                }
            }
        }
    }

    fn check_arities(&self, alphabet: &RankedAlphabet) -> Result<()> {
        match self {
            Node::Var(_) => Ok(()),
            Node::Sym(sym, children) => {
                if sym.0 >= alphabet.len() {
                    return Err(Error::AlphabetMismatch(format!(
                        "symbol id {} out of range",
                        sym.0
                    )));
                }
                let rank = alphabet.rank(*sym);
                if children.len() != rank {
                    return Err(Error::Arity {
                        expected: rank,
                        got: children.len(),
                    });
                }
                children.iter().try_for_each(|c| c.check_arities(alphabet))
            }
        }
    }

    fn shift_vars(&self, offset: usize) -> Node {
        match self {
            Node::Var(i) => Node::Var(i + offset),
            Node::Sym(sym, children) => Node::Sym(
                *sym,
                children.iter().map(|c| c.shift_vars(offset)).collect(),
            ),
        }
    }

    /// Total order used for canonical enumerations and witness tie-breaks:
    /// first by node count, then variables before symbols, then by symbol
    /// index and children left to right.
    pub fn canonical_cmp(&self, other: &Node) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| match (self, other) {
                (Node::Var(i), Node::Var(j)) => i.cmp(j),
                (Node::Var(_), Node::Sym(..)) => Ordering::Less,
                (Node::Sym(..), Node::Var(_)) => Ordering::Greater,
                (Node::Sym(s, cs), Node::Sym(t, ds)) => s.cmp(t).then_with(|| {
                    for (c, d) in cs.iter().zip(ds.iter()) {
                        let ord = c.canonical_cmp(d);
                        if ord != Ordering::Equal {
                            return ord;
                        }
                    }
                    Ordering::Equal
                }),
            })
    }
}

/// A tree with a validated variable frontier. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    alphabet: Arc<RankedAlphabet>,
    rank: usize,
    root: Node,
}

impl Tree {
    /// Builds a tree, validating arities and the frontier invariant: the
    /// variable leaves read left to right must be exactly `v1 ... vn`.
    pub fn new(alphabet: Arc<RankedAlphabet>, root: Node) -> Result<Tree> {
        root.check_arities(&alphabet)?;
        let mut vars = Vec::new();
        root.collect_vars(&mut vars);
        for (pos, &v) in vars.iter().enumerate() {
            if v != pos + 1 {
                return Err(Error::Parse(ParseError::new(
                    "term",
                    format!("frontier violation: expected v{} but found v{}", pos + 1, v),
                    1,
                    0,
                )));
            }
        }
        let rank = vars.len();
        Ok(Tree {
            alphabet,
            rank,
            root,
        })
    }

    /// The unit tree: a single leaf labeled `v1`.
    pub fn unit(alphabet: Arc<RankedAlphabet>) -> Tree {
        Tree {
            alphabet,
            rank: 1,
            root: Node::Var(1),
        }
    }

    /// The tree `sym(v1,...,vr)` identifying a letter with a tree.
    pub fn letter(alphabet: Arc<RankedAlphabet>, sym: SymbolId) -> Tree {
        let rank = alphabet.rank(sym);
        let children = (1..=rank).map(Node::Var).collect();
        Tree {
            alphabet,
            rank,
            root: Node::Sym(sym, children),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn canonical_cmp(&self, other: &Tree) -> Ordering {
        self.root.canonical_cmp(&other.root)
    }
}

/// A formal tuple of trees; the arguments of one composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTuple {
    components: Vec<Tree>,
    total_rank: usize,
}

impl TreeTuple {
    pub fn new(components: Vec<Tree>) -> TreeTuple {
        let total_rank = components.iter().map(Tree::rank).sum();
        TreeTuple {
            components,
            total_rank,
        }
    }

    pub fn components(&self) -> &[Tree] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_rank(&self) -> usize {
        self.total_rank
    }
}

/// Composes `f` with the tuple `gs`: each variable `vi` of `f` is replaced
/// by the i-th component and the component variables are renumbered
/// consecutively. The result has rank `gs.total_rank()`.
pub fn compose_trees(f: &Tree, gs: &TreeTuple) -> Result<Tree> {
    if gs.len() != f.rank {
        return Err(Error::Arity {
            expected: f.rank,
            got: gs.len(),
        });
    }
    for g in gs.components() {
        if g.alphabet != f.alphabet {
            return Err(Error::AlphabetMismatch(
                "composition components use a different alphabet".into(),
            ));
        }
    }
    // offsets[i] = total rank of components before i
    let mut offsets = Vec::with_capacity(gs.len());
    let mut acc = 0;
    for g in gs.components() {
        offsets.push(acc);
        acc += g.rank;
    }
    fn subst(node: &Node, gs: &TreeTuple, offsets: &[usize]) -> Node {
        match node {
            Node::Var(i) => gs.components()[i - 1].root.shift_vars(offsets[i - 1]),
            Node::Sym(sym, children) => Node::Sym(
                *sym,
                children.iter().map(|c| subst(c, gs, offsets)).collect(),
            ),
        }
    }
    let root = subst(&f.root, gs, &offsets);
    Ok(Tree {
        alphabet: f.alphabet.clone(),
        rank: gs.total_rank(),
        root,
    })
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_node(
            node: &Node,
            alphabet: &RankedAlphabet,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            match node {
                Node::Var(i) => write!(f, "v{}", i),
                Node::Sym(sym, children) => {
                    write!(f, "{}", alphabet.name(*sym))?;
                    if !children.is_empty() {
                        write!(f, "(")?;
                        for (i, c) in children.iter().enumerate() {
                            if i > 0 {
                                write!(f, ",")?;
                            }
                            write_node(c, alphabet, f)?;
                        }
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        write_node(&self.root, &self.alphabet, f)
    }
}

/// Canonical text form; round-trips with [`parse_tree`] bit-exactly.
pub fn print_tree(t: &Tree) -> String {
    t.to_string()
}

#[derive(Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    input: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer {
            input,
            chars: input.char_indices().peekable(),
        }
    }

    fn column(&mut self) -> usize {
        match self.chars.peek() {
            Some((i, _)) => self.input[..*i].chars().count() + 1,
            None => self.input.chars().count() + 1,
        }
    }

    /// Returns the next token with its 1-based column, or None at end.
    fn next_token(&mut self) -> Result<Option<(Token, usize)>> {
        while let Some((_, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.chars.next();
            } else {
                break;
            }
        }
        let col = self.column();
        let (start, c) = match self.chars.peek() {
            Some(&(i, c)) => (i, c),
            None => return Ok(None),
        };
        let token = match c {
            '(' => {
                self.chars.next();
                Token::LParen
            }
            ')' => {
                self.chars.next();
                Token::RParen
            }
            ',' => {
                self.chars.next();
                Token::Comma
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut end = start;
                while let Some(&(i, c)) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = i + c.len_utf8();
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                Token::Ident(self.input[start..end].to_owned())
            }
            other => {
                return Err(Error::Parse(ParseError::new(
                    "term",
                    format!("unexpected character {:?}", other),
                    1,
                    col,
                )))
            }
        };
        Ok(Some((token, col)))
    }
}

struct TermParser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<(Token, usize)>,
    alphabet: &'a Arc<RankedAlphabet>,
}

impl<'a> TermParser<'a> {
    fn peek(&mut self) -> Result<Option<&(Token, usize)>> {
        if self.lookahead.is_none() {
            self.lookahead = self.lexer.next_token()?;
        }
        Ok(self.lookahead.as_ref())
    }

    fn advance(&mut self) -> Result<Option<(Token, usize)>> {
        if self.lookahead.is_none() {
            self.lookahead = self.lexer.next_token()?;
        }
        Ok(self.lookahead.take())
    }

    fn err(message: impl Into<String>, col: usize) -> Error {
        Error::Parse(ParseError::new("term", message, 1, col))
    }

    fn parse_node(&mut self) -> Result<Node> {
        let (token, col) = match self.advance()? {
            Some(t) => t,
            None => return Err(Self::err("unexpected end of input", self.lexer.column())),
        };
        let name = match token {
            Token::Ident(name) => name,
            other => {
                return Err(Self::err(
                    format!("expected a symbol or variable, found {:?}", other),
                    col,
                ))
            }
        };
        if is_variable_name(&name) {
            let idx: usize = name[1..].parse().map_err(|_| {
                Self::err(format!("variable index out of range in {:?}", name), col)
            })?;
            return Ok(Node::Var(idx));
        }
        let sym = self
            .alphabet
            .lookup(&name)
            .ok_or_else(|| Self::err(format!("unknown symbol {:?}", name), col))?;
        let rank = self.alphabet.rank(sym);
        let mut children = Vec::new();
        if matches!(self.peek()?, Some((Token::LParen, _))) {
            self.advance()?;
            if matches!(self.peek()?, Some((Token::RParen, _))) {
                self.advance()?;
            } else {
                loop {
                    children.push(self.parse_node()?);
                    match self.advance()? {
                        Some((Token::Comma, _)) => continue,
                        Some((Token::RParen, _)) => break,
                        Some((other, c)) => {
                            return Err(Self::err(
                                format!("expected ',' or ')', found {:?}", other),
                                c,
                            ))
                        }
                        None => return Err(Self::err("unclosed '('", self.lexer.column())),
                    }
                }
            }
        }
        if children.len() != rank {
            return Err(Self::err(
                format!(
                    "arity mismatch: {} takes {} arguments, found {}",
                    name,
                    rank,
                    children.len()
                ),
                col,
            ));
        }
        Ok(Node::Sym(sym, children))
    }
}

/// Parses the term grammar `tree := symbol | symbol "(" tree ("," tree)* ")" | var`.
/// Nullary symbols may be written with or without parentheses.
pub fn parse_tree(text: &str, alphabet: &Arc<RankedAlphabet>) -> Result<Tree> {
    let mut parser = TermParser {
        lexer: Lexer::new(text),
        lookahead: None,
        alphabet,
    };
    let root = parser.parse_node()?;
    if let Some((token, col)) = parser.advance()? {
        return Err(TermParser::err(format!("trailing input {:?}", token), col));
    }
    // Frontier errors get positions: locate the first out-of-place variable.
    let mut vars = Vec::new();
    root.collect_vars(&mut vars);
    for (pos, &v) in vars.iter().enumerate() {
        if v != pos + 1 {
            let needle = format!("v{}", v);
            let col = text
                .find(&needle)
                .map(|i| text[..i].chars().count() + 1)
                .unwrap_or(1);
            return Err(Error::Parse(ParseError::new(
                "term",
                format!("frontier violation: expected v{} but found v{}", pos + 1, v),
                1,
                col,
            )));
        }
    }
    Tree::new(alphabet.clone(), root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta() -> Arc<RankedAlphabet> {
        RankedAlphabet::from_pairs(&[("0_0", 0), ("1_0", 0), ("0_2", 2), ("1_2", 2)]).unwrap()
    }

    fn boolean() -> Arc<RankedAlphabet> {
        RankedAlphabet::from_pairs(&[("true", 0), ("false", 0), ("or", 2)]).unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        let alpha = boolean();
        for text in ["or(true,false)", "true", "v1", "or(v1,or(true,v2))"] {
            let t = parse_tree(text, &alpha).unwrap();
            assert_eq!(print_tree(&t), text);
        }
    }

    #[test]
    fn nullary_parens_are_optional() {
        let alpha = boolean();
        let a = parse_tree("or(true,false)", &alpha).unwrap();
        let b = parse_tree("or(true(),false())", &alpha).unwrap();
        assert_eq!(a, b);
        assert_eq!(print_tree(&b), "or(true,false)");
    }

    #[test]
    fn parse_computes_rank() {
        let alpha = RankedAlphabet::from_pairs(&[("a", 2), ("b", 1)]).unwrap();
        let t = parse_tree("a(v1,b(v2))", &alpha).unwrap();
        assert_eq!(t.rank(), 2);
        assert_eq!(print_tree(&t), "a(v1,b(v2))");
        let ground = parse_tree("or(true,false)", &boolean()).unwrap();
        assert_eq!(ground.rank(), 0);
    }

    #[test]
    fn frontier_out_of_order_is_rejected() {
        let alpha = RankedAlphabet::from_pairs(&[("a", 2), ("b", 1)]).unwrap();
        let err = parse_tree("a(v2,v1)", &alpha).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frontier violation"), "{}", msg);
        // duplicated and gapped variables too
        assert!(parse_tree("a(v1,v1)", &alpha).is_err());
        assert!(parse_tree("a(v1,v3)", &alpha).is_err());
    }

    #[test]
    fn unknown_symbol_and_arity_errors_carry_position() {
        let alpha = boolean();
        let err = parse_tree("or(true,nope)", &alpha).unwrap_err();
        assert!(err.to_string().contains("unknown symbol"), "{}", err);
        assert!(err.to_string().contains("1:9"), "{}", err);
        let err = parse_tree("or(true)", &alpha).unwrap_err();
        assert!(err.to_string().contains("arity mismatch"), "{}", err);
    }

    #[test]
    fn variable_names_are_reserved() {
        assert!(RankedAlphabet::from_pairs(&[("v1", 0)]).is_err());
        assert!(RankedAlphabet::from_pairs(&[("v10", 2)]).is_err());
        // "v0" and "v01" do not match the variable pattern, so they are plain symbols
        assert!(RankedAlphabet::from_pairs(&[("v0", 0), ("v01", 0)]).is_ok());
    }

    #[test]
    fn unit_composition_is_identity() {
        let alpha = boolean();
        let t = parse_tree("or(v1,true)", &alpha).unwrap();
        let unit = Tree::unit(alpha.clone());
        // 1 . f = f
        assert_eq!(
            compose_trees(&unit, &TreeTuple::new(vec![t.clone()])).unwrap(),
            t
        );
        // f . (1 + ... + 1) = f
        let units = TreeTuple::new(vec![Tree::unit(alpha.clone()); t.rank()]);
        assert_eq!(compose_trees(&t, &units).unwrap(), t);
    }

    #[test]
    fn substitution_example() {
        let alpha = boolean();
        let f = parse_tree("or(v1,v2)", &alpha).unwrap();
        let gs = TreeTuple::new(vec![
            parse_tree("true", &alpha).unwrap(),
            parse_tree("false", &alpha).unwrap(),
        ]);
        let composed = compose_trees(&f, &gs).unwrap();
        assert_eq!(print_tree(&composed), "or(true,false)");
        assert_eq!(composed.rank(), 0);
    }

    #[test]
    fn substitution_renumbers_variables() {
        let alpha = RankedAlphabet::from_pairs(&[("a", 2), ("b", 1), ("c0", 0)]).unwrap();
        let f = parse_tree("a(v1,b(v2))", &alpha).unwrap();
        let gs = TreeTuple::new(vec![
            parse_tree("b(v1)", &alpha).unwrap(),
            parse_tree("c0", &alpha).unwrap(),
        ]);
        let composed = compose_trees(&f, &gs).unwrap();
        assert_eq!(print_tree(&composed), "a(b(v1),b(c0))");
        assert_eq!(composed.rank(), 1);
    }

    #[test]
    fn component_count_mismatch_is_an_arity_error() {
        let alpha = boolean();
        let f = parse_tree("or(v1,v2)", &alpha).unwrap();
        let gs = TreeTuple::new(vec![parse_tree("true", &alpha).unwrap()]);
        assert!(matches!(
            compose_trees(&f, &gs),
            Err(Error::Arity {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn compose_rejects_foreign_alphabets() {
        let f = parse_tree("or(v1,v2)", &boolean()).unwrap();
        let gs = TreeTuple::new(vec![
            parse_tree("0_0", &delta()).unwrap(),
            parse_tree("1_0", &delta()).unwrap(),
        ]);
        assert!(matches!(
            compose_trees(&f, &gs),
            Err(Error::AlphabetMismatch(_))
        ));
    }
}
