//! Reduction of "does this binary NFA have a D3-synchronizing word of length
//! exactly ℓ" to CNF satisfiability.
//!
//! Three kinds of variables are used:
//!
//! * letter variables `x_t` (true means symbol 1 is read at step `t`),
//! * token variables `y_ij^t` (token `i`, started on state `i`, sits on
//!   state `j` after `t` moves),
//! * synchronization variables `z_j` (state `j` holds every token at the
//!   end).
//!
//! Variables are laid out contiguously: all letters first, then the token
//! layers `t = 0, 1, …` each as an `n × n` block in row-major `(i, j)`
//! order, then the `n` synchronization variables. The same layout is used by
//! every variant with the letter block and the layer count adjusted, so
//! DIMACS output is reproducible byte-for-byte.
//!
//! Clauses are emitted as: initial layer, then each transition step (token
//! `i` outer, state `j` inner, the two long clauses before the short ones),
//! then the synchronization clauses.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::cnf::{Clause, Cnf, CnfError, Lit, Model};
use crate::nfa::{Nfa, State, StateSet, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Letter, token and synchronization variables.
    Basic,
    /// No letter variables; each transition step is a single long clause per
    /// `(i, j)` plus one short clause per pair of 0- and 1-preimages.
    LetterFree,
    /// The first symbol is fixed to the everywhere-defined one and the token
    /// game starts from the position after that move.
    ForcedFirstZero,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Basic, Variant::LetterFree, Variant::ForcedFirstZero];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::LetterFree => "letterfree",
            Variant::ForcedFirstZero => "forced0",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown encoding variant {0:?} (expected basic, letterfree or forced0)")]
pub struct ParseVariantError(pub alloc::string::String);

impl FromStr for Variant {
    type Err = ParseVariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Variant::Basic),
            "letterfree" | "letter-free" => Ok(Variant::LetterFree),
            "forced0" | "forced-first-zero" => Ok(Variant::ForcedFirstZero),
            other => Err(ParseVariantError(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("the encoding needs exactly two input symbols, got {alphabet}")]
    UnsupportedAlphabet { alphabet: usize },
    #[error("word length must be at least 1")]
    ZeroLength,
    #[error("transition step {step} is outside 1..={steps}")]
    StepOutOfRange { step: usize, steps: usize },
    #[error("forced-first-symbol encoding not applicable: neither symbol 0 nor symbol 1 is defined at every state")]
    NoTotalSymbol,
    #[error("forced-first-symbol encoding not applicable: both symbols are defined at every state")]
    BothSymbolsTotal,
    #[error("the letter-free encoding has no letter variables to decode a word from")]
    NoLetterVariables,
    #[error("model has {found} variables, the encoding declares {expected}")]
    ModelSize { expected: u32, found: u32 },
    #[error("variable layout is inconsistent: {0}")]
    Layout(&'static str),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Bijection between letter, token and synchronization variables and
/// variable indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarMap {
    variant: Variant,
    states: usize,
    length: usize,
    letters: usize,
    layers: usize,
    swapped: bool,
}

impl VarMap {
    /// Layout for words of length `length` over an `states`-state automaton.
    /// `swapped` records that symbols 0 and 1 were exchanged before a forced
    /// encoding, and is only meaningful for [`Variant::ForcedFirstZero`].
    pub fn new(variant: Variant, states: usize, length: usize, swapped: bool) -> Result<VarMap, EncodeError> {
        if length == 0 {
            return Err(EncodeError::ZeroLength);
        }
        if states == 0 {
            return Err(EncodeError::Layout("no states"));
        }
        if swapped && variant != Variant::ForcedFirstZero {
            return Err(EncodeError::Layout("only the forced variant renames symbols"));
        }
        let (letters, layers) = match variant {
            Variant::Basic => (length, length + 1),
            Variant::LetterFree => (0, length + 1),
            Variant::ForcedFirstZero => (length - 1, length),
        };
        Ok(VarMap {
            variant,
            states,
            length,
            letters,
            layers,
            swapped,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Length of the encoded words.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn letter_count(&self) -> usize {
        self.letters
    }

    pub fn layer_count(&self) -> usize {
        self.layers
    }

    /// Number of transition steps between token layers.
    pub fn steps(&self) -> usize {
        self.layers - 1
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn token_offset(&self) -> u32 {
        self.letters as u32
    }

    pub fn sync_offset(&self) -> u32 {
        (self.letters + self.layers * self.states * self.states) as u32
    }

    pub fn num_vars(&self) -> u32 {
        self.sync_offset() + self.states as u32
    }

    /// `x_t`, `t ∈ 1..=letter_count`.
    pub fn letter(&self, t: usize) -> u32 {
        assert!(t >= 1 && t <= self.letters, "letter index {t} out of range");
        t as u32
    }

    /// `y_ij^t`, `i, j ∈ 1..=n`, `t ∈ 0..layer_count`.
    pub fn token(&self, i: State, j: State, t: usize) -> u32 {
        let n = self.states;
        assert!(i >= 1 && i <= n && j >= 1 && j <= n, "token ({i},{j}) out of range");
        assert!(t < self.layers, "layer {t} out of range");
        (self.letters + t * n * n + (i - 1) * n + j) as u32
    }

    /// `z_j`, `j ∈ 1..=n`.
    pub fn sync(&self, j: State) -> u32 {
        assert!(j >= 1 && j <= self.states, "state {j} out of range");
        self.sync_offset() + j as u32
    }
}

/// A CNF together with its variable layout and the sizes of its clause
/// sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub cnf: Cnf,
    pub varmap: VarMap,
    pub sections: Sections,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sections {
    pub initial: usize,
    /// Clause count of each transition step, in order.
    pub transitions: Vec<usize>,
    pub sync: usize,
}

fn check_binary(nfa: &Nfa) -> Result<(), EncodeError> {
    if nfa.alphabet() == 2 {
        Ok(())
    } else {
        Err(EncodeError::UnsupportedAlphabet {
            alphabet: nfa.alphabet(),
        })
    }
}

fn check_step(vm: &VarMap, t: usize) -> Result<(), EncodeError> {
    if t >= 1 && t <= vm.steps() {
        Ok(())
    } else {
        Err(EncodeError::StepOutOfRange {
            step: t,
            steps: vm.steps(),
        })
    }
}

/// `P_0(q_j)` and `P_1(q_j)` for every `j`, as ascending lists.
fn preimage_lists(nfa: &Nfa) -> [Vec<Vec<State>>; 2] {
    let n = nfa.states();
    let mut pre = [vec![Vec::new(); n + 1], vec![Vec::new(); n + 1]];
    for p in 1..=n {
        for (s, lists) in pre.iter_mut().enumerate() {
            for &q in nfa.successors(p, s) {
                lists[q].push(p);
            }
        }
    }
    pre
}

/// The identity token layer: `y_ii^0` and `¬y_ij^0` for `i ≠ j`, in
/// row-major order. Exactly `n²` unit clauses.
pub fn initial_clauses(vm: &VarMap) -> Vec<Clause> {
    let n = vm.states();
    let mut out = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            out.push(Clause::unit(Lit::with_sign(vm.token(i, j, 0), i == j)));
        }
    }
    out
}

/// Unit clauses fixing layer 0 to the token position after reading `s`
/// once: `y_ij^0` iff `q_j ∈ δ(q_i, s)`.
pub fn initial_clauses_after(nfa: &Nfa, vm: &VarMap, s: Symbol) -> Vec<Clause> {
    let n = vm.states();
    let mut out = Vec::with_capacity(n * n);
    for i in 1..=n {
        let image = nfa.image(i, s);
        for j in 1..=n {
            out.push(Clause::unit(Lit::with_sign(vm.token(i, j, 0), image.contains(j))));
        }
    }
    out
}

/// Clauses linking layer `t − 1` to layer `t` through the letter `x_t`.
///
/// For each `(i, j)`:
/// `¬y_ij^t ∨ x_t ∨ ⋁_{h ∈ P0(j)} y_ih^{t−1}`,
/// `¬y_ij^t ∨ ¬x_t ∨ ⋁_{k ∈ P1(j)} y_ik^{t−1}`,
/// then `y_ij^t ∨ ¬x_t ∨ ¬y_ik^{t−1}` for each `k ∈ P1(j)` and
/// `y_ij^t ∨ x_t ∨ ¬y_ih^{t−1}` for each `h ∈ P0(j)`.
pub fn transition_clauses_basic(nfa: &Nfa, vm: &VarMap, t: usize) -> Result<Vec<Clause>, EncodeError> {
    check_binary(nfa)?;
    check_step(vm, t)?;
    if vm.letter_count() < t {
        return Err(EncodeError::Layout("step has no letter variable"));
    }
    let n = vm.states();
    let [pre0, pre1] = preimage_lists(nfa);
    let x = vm.letter(t);
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let y = vm.token(i, j, t);
            let mut long0 = vec![Lit::neg(y), Lit::pos(x)];
            long0.extend(pre0[j].iter().map(|&h| Lit::pos(vm.token(i, h, t - 1))));
            out.push(Clause::new(long0));
            let mut long1 = vec![Lit::neg(y), Lit::neg(x)];
            long1.extend(pre1[j].iter().map(|&k| Lit::pos(vm.token(i, k, t - 1))));
            out.push(Clause::new(long1));
            for &k in &pre1[j] {
                out.push(Clause::new(vec![Lit::pos(y), Lit::neg(x), Lit::neg(vm.token(i, k, t - 1))]));
            }
            for &h in &pre0[j] {
                out.push(Clause::new(vec![Lit::pos(y), Lit::pos(x), Lit::neg(vm.token(i, h, t - 1))]));
            }
        }
    }
    Ok(out)
}

/// Letter-free transition clauses: `¬y_ij^t ∨ ⋁_{P0(j)} y_ih^{t−1} ∨
/// ⋁_{P1(j)} y_ik^{t−1}` per `(i, j)`, and `y_ij^t ∨ ¬y_ih^{t−1} ∨
/// ¬y_ik^{t−1}` per pair `(h, k) ∈ P0(j) × P1(j)`.
///
/// These clauses let each token pick its own symbol at each step, so the
/// resulting formula is implied by, but in general weaker than, the basic
/// one: a satisfying assignment need not correspond to any word.
pub fn transition_clauses_letter_free(nfa: &Nfa, vm: &VarMap, t: usize) -> Result<Vec<Clause>, EncodeError> {
    check_binary(nfa)?;
    check_step(vm, t)?;
    let n = vm.states();
    let [pre0, pre1] = preimage_lists(nfa);
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let y = vm.token(i, j, t);
            let mut long = vec![Lit::neg(y)];
            long.extend(pre0[j].iter().map(|&h| Lit::pos(vm.token(i, h, t - 1))));
            long.extend(pre1[j].iter().map(|&k| Lit::pos(vm.token(i, k, t - 1))));
            out.push(Clause::new(long));
            for &h in &pre0[j] {
                for &k in &pre1[j] {
                    let mut short = vec![Lit::pos(y), Lit::neg(vm.token(i, h, t - 1))];
                    if k != h {
                        short.push(Lit::neg(vm.token(i, k, t - 1)));
                    }
                    out.push(Clause::new(short));
                }
            }
        }
    }
    Ok(out)
}

/// `⋁_j z_j` followed by `¬z_j ∨ y_ij^last` for all `(i, j)`: exactly
/// `n² + 1` clauses.
pub fn synchronization_clauses(vm: &VarMap) -> Vec<Clause> {
    let n = vm.states();
    let last = vm.layer_count() - 1;
    let mut out = Vec::with_capacity(n * n + 1);
    out.push(Clause::new((1..=n).map(|j| Lit::pos(vm.sync(j))).collect()));
    for i in 1..=n {
        for j in 1..=n {
            out.push(Clause::new(vec![Lit::neg(vm.sync(j)), Lit::pos(vm.token(i, j, last))]));
        }
    }
    out
}

fn assemble(
    nfa: &Nfa,
    vm: VarMap,
    initial: Vec<Clause>,
    step: fn(&Nfa, &VarMap, usize) -> Result<Vec<Clause>, EncodeError>,
) -> Result<Encoding, EncodeError> {
    let mut cnf = Cnf::new(vm.num_vars());
    let mut sections = Sections {
        initial: initial.len(),
        ..Sections::default()
    };
    cnf.extend(initial)?;
    for t in 1..=vm.steps() {
        let clauses = step(nfa, &vm, t)?;
        sections.transitions.push(clauses.len());
        cnf.extend(clauses)?;
    }
    let sync = synchronization_clauses(&vm);
    sections.sync = sync.len();
    cnf.extend(sync)?;
    Ok(Encoding {
        cnf,
        varmap: vm,
        sections,
    })
}

/// The basic encoding: satisfiable iff `nfa` has a D3-synchronizing word of
/// length exactly `length`, with satisfying assignments restricted to the
/// letter variables in 1-1 correspondence with such words.
pub fn encode_basic(nfa: &Nfa, length: usize) -> Result<Encoding, EncodeError> {
    check_binary(nfa)?;
    let vm = VarMap::new(Variant::Basic, nfa.states(), length, false)?;
    assemble(nfa, vm, initial_clauses(&vm), transition_clauses_basic)
}

pub fn encode_letter_free(nfa: &Nfa, length: usize) -> Result<Encoding, EncodeError> {
    check_binary(nfa)?;
    let vm = VarMap::new(Variant::LetterFree, nfa.states(), length, false)?;
    assemble(nfa, vm, initial_clauses(&vm), transition_clauses_letter_free)
}

/// Which symbol must open every D3-synchronizing word: `Ok(false)` when
/// symbol 0 is everywhere defined and symbol 1 is not, `Ok(true)` for the
/// mirrored situation (the encoder then swaps the symbols).
pub fn forced_first_symbol(nfa: &Nfa) -> Result<bool, EncodeError> {
    check_binary(nfa)?;
    match (nfa.is_everywhere_defined(0), nfa.is_everywhere_defined(1)) {
        (true, false) => Ok(false),
        (false, true) => Ok(true),
        (true, true) => Err(EncodeError::BothSymbolsTotal),
        (false, false) => Err(EncodeError::NoTotalSymbol),
    }
}

/// Words of length `length` that start with the everywhere-defined symbol.
/// Layer 0 is the token position after that first move, so there are
/// `length − 1` letter variables and `length` token layers.
pub fn encode_forced_first_zero(nfa: &Nfa, length: usize) -> Result<Encoding, EncodeError> {
    let swapped = forced_first_symbol(nfa)?;
    let renamed;
    let work = if swapped {
        renamed = nfa.swap_binary_symbols();
        &renamed
    } else {
        nfa
    };
    let vm = VarMap::new(Variant::ForcedFirstZero, nfa.states(), length, swapped)?;
    assemble(work, vm, initial_clauses_after(work, &vm, 0), transition_clauses_basic)
}

pub fn encode(nfa: &Nfa, length: usize, variant: Variant) -> Result<Encoding, EncodeError> {
    match variant {
        Variant::Basic => encode_basic(nfa, length),
        Variant::LetterFree => encode_letter_free(nfa, length),
        Variant::ForcedFirstZero => encode_forced_first_zero(nfa, length),
    }
}

fn check_model(vm: &VarMap, model: &Model) -> Result<(), EncodeError> {
    if model.num_vars() == vm.num_vars() {
        Ok(())
    } else {
        Err(EncodeError::ModelSize {
            expected: vm.num_vars(),
            found: model.num_vars(),
        })
    }
}

/// Reads the word off the letter variables (`x_t` true means symbol 1). For
/// the forced variant the fixed first symbol is prepended and any symbol
/// renaming undone.
pub fn decode_word(vm: &VarMap, model: &Model) -> Result<Word, EncodeError> {
    check_model(vm, model)?;
    let mut symbols = Vec::with_capacity(vm.length());
    match vm.variant() {
        Variant::LetterFree => return Err(EncodeError::NoLetterVariables),
        Variant::Basic => {}
        Variant::ForcedFirstZero => symbols.push(0),
    }
    symbols.extend((1..=vm.letter_count()).map(|t| model.value(vm.letter(t)) as Symbol));
    if vm.swapped() {
        for s in &mut symbols {
            *s = 1 - *s;
        }
    }
    Ok(Word(symbols))
}

/// Token positions stored in layer `t`: entry `i − 1` is the set of states
/// `j` with `y_ij^t` true.
pub fn token_layer(vm: &VarMap, model: &Model, t: usize) -> Result<Vec<StateSet>, EncodeError> {
    check_model(vm, model)?;
    if t >= vm.layer_count() {
        return Err(EncodeError::StepOutOfRange {
            step: t,
            steps: vm.steps(),
        });
    }
    let n = vm.states();
    Ok((1..=n)
        .map(|i| {
            let mut row = StateSet::empty(n);
            for j in (1..=n).filter(|&j| model.value(vm.token(i, j, t))) {
                row.insert(j);
            }
            row
        })
        .collect())
}

/// The letter-free encoding carries no word. This recovers one when every
/// step of the model moves all tokens consistently with a single symbol.
pub fn letters_from_token_layers(nfa: &Nfa, vm: &VarMap, model: &Model) -> Result<Option<Word>, EncodeError> {
    check_binary(nfa)?;
    let n = vm.states();
    let mut prev = token_layer(vm, model, 0)?;
    let mut word = Vec::with_capacity(vm.steps());
    for t in 1..=vm.steps() {
        let next = token_layer(vm, model, t)?;
        let found = (0..2).find(|&s| {
            prev.iter().zip(&next).all(|(from, to)| {
                let mut img = StateSet::empty(n);
                for q in from.iter() {
                    img.union_with(nfa.image(q, s));
                }
                &img == to
            })
        });
        match found {
            Some(s) => word.push(s),
            None => return Ok(None),
        }
        prev = next;
    }
    Ok(Some(Word(word)))
}
