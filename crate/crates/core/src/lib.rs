//! Shortest D3-synchronizing words of nondeterministic automata via SAT.
//!
//! A word `w` is D3-synchronizing for an NFA when some state `q` lies in
//! `δ(p, w)` for every state `p`. This crate holds the automaton model, the
//! three CNF encodings of "a D3 word of length ℓ exists", a CDCL solver, the
//! length search, exact oracles, and the random automaton generators. It
//! needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cnf;
pub mod encoding;
pub mod matrix;
pub mod nfa;
pub mod oracle;
pub mod random;
pub mod search;
pub mod solver;
pub mod stats;

pub use cnf::{Clause, Cnf, Lit, Model};
pub use encoding::{encode, Encoding, Variant, VarMap};
pub use nfa::{Nfa, NfaError, State, StateSet, Symbol, Word};
pub use search::{find_min_length, SearchMode, SearchOptions, SearchOutcome, Verdict};
pub use solver::{InternalSolver, SatBackend, SolveResult, SolveStatus};
