//! Trees over ranked alphabets, deterministic bottom-up tree automata, and
//! the transformation preclones they generate.
//!
//! The crate builds the syntactic algebra of a regular tree language (the
//! minimal automaton), saturates the letter actions into the rank-capped
//! slices of the generated sub-preclone, and decides membership of the
//! language in the classes TL(EX), TL(EF) and FO[Succ] by checking
//! pseudo-identities on that truncation. Division between truncations and
//! membership in the pseudovariety generated by one preclone are searched
//! at desk scale with explicit certificates.
//!
//! With the default `parallel` feature, batch evaluation and the larger
//! enumerations run on rayon; disabling the feature falls back to
//! sequential code with identical results.

pub mod algebra;
pub mod corpus;
pub mod deciders;
mod error;
mod par;
pub mod preclone;
pub mod psv;
pub mod terms;

pub use error::{Error, ParseError, Result};
