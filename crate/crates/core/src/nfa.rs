//! Nondeterministic automata over a finite alphabet and the extended
//! transition function on sets of states.
//!
//! States are numbered `1..=n`, symbols `0..alphabet`. A transition
//! `delta(q, s)` is a possibly empty set of states; an empty set means the
//! action of `s` is undefined at `q`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;
use core::str::FromStr;

use thiserror::Error;

/// A state index in `1..=n`.
pub type State = usize;
/// A symbol index in `0..alphabet`.
pub type Symbol = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfaError {
    #[error("an automaton needs at least one state")]
    NoStates,
    #[error("an automaton needs at least one input symbol")]
    EmptyAlphabet,
    #[error("state {state} is out of range 1..={states}")]
    StateOutOfRange { state: State, states: usize },
    #[error("symbol {symbol} is out of range 0..{alphabet}")]
    SymbolOutOfRange { symbol: Symbol, alphabet: usize },
    #[error("transition table has {found} {what}, expected {expected}")]
    Shape {
        what: &'static str,
        found: usize,
        expected: usize,
    },
}

/// A subset of the states `1..=n`, stored as a dense bitset.
///
/// Equality is structural: two sets over the same `n` are equal iff they
/// hold the same states.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    states: usize,
    bits: Vec<u64>,
}

impl StateSet {
    pub fn empty(states: usize) -> Self {
        StateSet {
            states,
            bits: vec![0; states.div_ceil(64)],
        }
    }

    pub fn full(states: usize) -> Self {
        let mut set = Self::empty(states);
        for q in 1..=states {
            set.insert(q);
        }
        set
    }

    pub fn singleton(states: usize, q: State) -> Self {
        let mut set = Self::empty(states);
        set.insert(q);
        set
    }

    /// Builds a set from state indices, rejecting anything outside `1..=n`.
    pub fn from_states<I>(states: usize, members: I) -> Result<Self, NfaError>
    where
        I: IntoIterator<Item = State>,
    {
        let mut set = Self::empty(states);
        for q in members {
            if q == 0 || q > states {
                return Err(NfaError::StateOutOfRange { state: q, states });
            }
            set.insert(q);
        }
        Ok(set)
    }

    /// Number of states of the universe this set lives in.
    pub fn universe(&self) -> usize {
        self.states
    }

    /// # Panics
    ///
    /// Panics if `q` is not in `1..=n`.
    pub fn insert(&mut self, q: State) {
        assert!(q >= 1 && q <= self.states, "state {q} out of range");
        let b = q - 1;
        self.bits[b / 64] |= 1 << (b % 64);
    }

    pub fn contains(&self, q: State) -> bool {
        if q == 0 || q > self.states {
            return false;
        }
        let b = q - 1;
        self.bits[b / 64] & (1 << (b % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.states
    }

    pub fn union_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.states, other.states);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.states, other.states);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= *b;
        }
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = State> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz + 1)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<State> {
        self.iter().collect()
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A word over the symbols `0..alphabet`.
///
/// Displays as a digit string when every symbol is below 10 (`"010"`),
/// otherwise as dot-separated indices (`"0.11.2"`).
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
        } else {
            for (i, s) in self.0.iter().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse word: {0:?}")]
pub struct ParseWordError(pub alloc::string::String);

impl FromStr for Word {
    type Err = ParseWordError;

    /// Accepts the two forms produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseWordError(s.into());
        if s.contains('.') {
            s.split('.')
                .map(|t| t.parse::<Symbol>().map_err(|_| err()))
                .collect::<Result<Vec<_>, _>>()
                .map(Word)
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or_else(err))
                .collect::<Result<Vec<_>, _>>()
                .map(Word)
        }
    }
}

/// A nondeterministic finite automaton `(Q, Σ, δ)` without initial or final
/// states. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Nfa {
    states: usize,
    alphabet: usize,
    // indexed by (q - 1) * alphabet + s
    succ: Vec<Vec<State>>,
    images: Vec<StateSet>,
}

impl Nfa {
    /// Builds an automaton from `delta[q - 1][s]`, the successor list of
    /// state `q` under symbol `s`. Successor lists are sorted and
    /// deduplicated.
    pub fn new(states: usize, alphabet: usize, delta: Vec<Vec<Vec<State>>>) -> Result<Self, NfaError> {
        if states == 0 {
            return Err(NfaError::NoStates);
        }
        if alphabet == 0 {
            return Err(NfaError::EmptyAlphabet);
        }
        if delta.len() != states {
            return Err(NfaError::Shape {
                what: "state rows",
                found: delta.len(),
                expected: states,
            });
        }
        let mut succ = Vec::with_capacity(states * alphabet);
        let mut images = Vec::with_capacity(states * alphabet);
        for row in delta {
            if row.len() != alphabet {
                return Err(NfaError::Shape {
                    what: "symbol columns",
                    found: row.len(),
                    expected: alphabet,
                });
            }
            for mut targets in row {
                targets.sort_unstable();
                targets.dedup();
                images.push(StateSet::from_states(states, targets.iter().copied())?);
                succ.push(targets);
            }
        }
        Ok(Nfa {
            states,
            alphabet,
            succ,
            images,
        })
    }

    /// Builds an automaton from a list of labelled edges `(q, s, q')`.
    pub fn from_edges(states: usize, alphabet: usize, edges: &[(State, Symbol, State)]) -> Result<Self, NfaError> {
        let mut delta = vec![vec![Vec::new(); alphabet]; states];
        for &(q, s, p) in edges {
            if q == 0 || q > states {
                return Err(NfaError::StateOutOfRange { state: q, states });
            }
            if s >= alphabet {
                return Err(NfaError::SymbolOutOfRange { symbol: s, alphabet });
            }
            delta[q - 1][s].push(p);
        }
        Nfa::new(states, alphabet, delta)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Number of transitions `(q, s, q')` with `q' ∈ δ(q, s)`.
    pub fn transition_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// `δ(q, s)` as a sorted slice.
    ///
    /// # Panics
    ///
    /// Panics on an out-of-range state or symbol.
    pub fn successors(&self, q: State, s: Symbol) -> &[State] {
        &self.succ[self.index(q, s)]
    }

    /// `δ(q, s)` as a set.
    pub fn image(&self, q: State, s: Symbol) -> &StateSet {
        &self.images[self.index(q, s)]
    }

    /// The full transition table in the `delta[q - 1][s]` layout accepted by
    /// [`Nfa::new`].
    pub fn delta(&self) -> Vec<Vec<Vec<State>>> {
        (1..=self.states)
            .map(|q| (0..self.alphabet).map(|s| self.successors(q, s).to_vec()).collect())
            .collect()
    }

    fn index(&self, q: State, s: Symbol) -> usize {
        assert!(q >= 1 && q <= self.states, "state {q} out of range");
        assert!(s < self.alphabet, "symbol {s} out of range");
        (q - 1) * self.alphabet + s
    }

    pub fn check_symbol(&self, s: Symbol) -> Result<(), NfaError> {
        if s < self.alphabet {
            Ok(())
        } else {
            Err(NfaError::SymbolOutOfRange {
                symbol: s,
                alphabet: self.alphabet,
            })
        }
    }

    pub fn check_word(&self, w: &[Symbol]) -> Result<(), NfaError> {
        w.iter().try_for_each(|&s| self.check_symbol(s))
    }

    fn check_state(&self, q: State) -> Result<(), NfaError> {
        if q >= 1 && q <= self.states {
            Ok(())
        } else {
            Err(NfaError::StateOutOfRange {
                state: q,
                states: self.states,
            })
        }
    }

    /// `X.s`: the union of `δ(q, s)` over `q ∈ X`.
    pub fn apply_symbol(&self, xs: &StateSet, s: Symbol) -> Result<StateSet, NfaError> {
        self.check_symbol(s)?;
        Ok(self.step(xs, s))
    }

    fn step(&self, xs: &StateSet, s: Symbol) -> StateSet {
        let mut out = StateSet::empty(self.states);
        for q in xs.iter() {
            out.union_with(self.image(q, s));
        }
        out
    }

    /// `X.w`, folding [`Nfa::apply_symbol`] left to right. The empty word
    /// leaves `X` unchanged.
    pub fn apply_word(&self, xs: &StateSet, w: &[Symbol]) -> Result<StateSet, NfaError> {
        self.check_word(w)?;
        Ok(w.iter().fold(xs.clone(), |acc, &s| self.step(&acc, s)))
    }

    fn state_images(&self, w: &[Symbol]) -> Result<Vec<StateSet>, NfaError> {
        self.check_word(w)?;
        Ok((1..=self.states)
            .map(|q| {
                w.iter()
                    .fold(StateSet::singleton(self.states, q), |acc, &s| self.step(&acc, s))
            })
            .collect())
    }

    /// (D1): every `q.w` is nonempty and `|q.w| = |Q.w| = 1`.
    pub fn is_d1_word(&self, w: &[Symbol]) -> Result<bool, NfaError> {
        let images = self.state_images(w)?;
        let mut all = StateSet::empty(self.states);
        for img in &images {
            if img.len() != 1 {
                return Ok(false);
            }
            all.union_with(img);
        }
        Ok(all.len() == 1)
    }

    /// (D2): every `q.w` is nonempty and equal to `Q.w`.
    pub fn is_d2_word(&self, w: &[Symbol]) -> Result<bool, NfaError> {
        let images = self.state_images(w)?;
        let first = &images[0];
        Ok(!first.is_empty() && images.iter().all(|img| img == first))
    }

    /// (D3): the intersection of `q.w` over all states is nonempty.
    pub fn is_d3_word(&self, w: &[Symbol]) -> Result<bool, NfaError> {
        let images = self.state_images(w)?;
        let mut common = StateSet::full(self.states);
        for img in &images {
            common.intersect_with(img);
        }
        Ok(!common.is_empty())
    }

    /// (C): reading `w` from `Q` never hits an undefined transition and ends
    /// in a single state. The empty word qualifies only when `n = 1`.
    pub fn is_carefully_sync_word(&self, w: &[Symbol]) -> Result<bool, NfaError> {
        self.check_word(w)?;
        let mut current = StateSet::full(self.states);
        for &s in w {
            if current.iter().any(|q| self.successors(q, s).is_empty()) {
                return Ok(false);
            }
            current = self.step(&current, s);
        }
        Ok(current.len() == 1)
    }

    /// Whether `δ(q, s)` is nonempty at every state.
    pub fn is_everywhere_defined(&self, s: Symbol) -> bool {
        s < self.alphabet && (1..=self.states).all(|q| !self.successors(q, s).is_empty())
    }

    /// The smallest symbol whose action is defined at every state.
    pub fn everywhere_defined_symbol(&self) -> Option<Symbol> {
        (0..self.alphabet).find(|&s| self.is_everywhere_defined(s))
    }

    /// `P_s(q) = { p | q ∈ δ(p, s) }`.
    pub fn preimages(&self, q: State, s: Symbol) -> Result<StateSet, NfaError> {
        self.check_state(q)?;
        self.check_symbol(s)?;
        let mut out = StateSet::empty(self.states);
        for p in 1..=self.states {
            if self.image(p, s).contains(q) {
                out.insert(p);
            }
        }
        Ok(out)
    }

    /// The automaton with symbols 0 and 1 exchanged. Other symbols are kept.
    pub fn swap_binary_symbols(&self) -> Nfa {
        let delta = (1..=self.states)
            .map(|q| {
                (0..self.alphabet)
                    .map(|s| {
                        let src = match s {
                            0 if self.alphabet > 1 => 1,
                            1 => 0,
                            other => other,
                        };
                        self.successors(q, src).to_vec()
                    })
                    .collect()
            })
            .collect();
        Nfa::new(self.states, self.alphabet, delta).expect("swapping symbols keeps the table valid")
    }
}

impl fmt::Debug for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nfa(n={}, alphabet={}, delta=", self.states, self.alphabet)?;
        f.debug_list().entries(self.delta()).finish()?;
        f.write_str(")")
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use alloc::string::ToString;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    const A: Symbol = 0;
    const B: Symbol = 1;
    const C: Symbol = 2;

    #[test]
    fn apply_symbol_examples() {
        let nfa = fig1_right();
        // state 0 of the figure is state 1 here
        assert_eq!(nfa.apply_symbol(&set(3, &[2]), A).unwrap(), set(3, &[1, 2]));
        assert!(nfa.apply_symbol(&StateSet::empty(3), B).unwrap().is_empty());
        let f2 = fig2();
        assert_eq!(f2.apply_symbol(&set(5, &[1, 5]), 0).unwrap(), set(5, &[1, 2]));
        assert_eq!(
            nfa.apply_symbol(&set(3, &[1]), 7),
            Err(NfaError::SymbolOutOfRange { symbol: 7, alphabet: 3 })
        );
    }

    #[test]
    fn apply_word_examples() {
        let nfa = fig1_right();
        assert_eq!(nfa.apply_word(&set(3, &[2]), &[A, B]).unwrap(), set(3, &[2, 3]));
        assert_eq!(nfa.apply_word(&set(3, &[1, 3]), &[]).unwrap(), set(3, &[1, 3]));
        assert_eq!(nfa.apply_word(&set(3, &[1]), &[A, B, C]).unwrap(), set(3, &[1]));
    }

    #[test]
    fn synchronization_notions_on_figure_one() {
        let nfa = fig1_right();
        assert!(nfa.is_d3_word(&[A]).unwrap());
        assert!(!nfa.is_d2_word(&[A]).unwrap());
        assert!(nfa.is_d2_word(&[A, B]).unwrap());
        assert!(!nfa.is_d1_word(&[A, B]).unwrap());
        assert!(nfa.is_d1_word(&[A, B, C]).unwrap());
        assert!(!nfa.is_carefully_sync_word(&[A, B, C]).unwrap());
    }

    #[test]
    fn figure_one_has_no_careful_word_up_to_six() {
        let nfa = fig1_right();
        for len in 1..=6u32 {
            for code in 0..3usize.pow(len) {
                let mut c = code;
                let word: Vec<Symbol> = (0..len)
                    .map(|_| {
                        let s = c % 3;
                        c /= 3;
                        s
                    })
                    .collect();
                assert!(!nfa.is_carefully_sync_word(&word).unwrap(), "{word:?}");
            }
        }
    }

    #[test]
    fn careful_on_trivial_dfa_and_empty_word() {
        let one = Nfa::from_edges(1, 1, &[(1, 0, 1)]).unwrap();
        assert!(one.is_carefully_sync_word(&[0]).unwrap());
        assert!(one.is_carefully_sync_word(&[]).unwrap());
        assert!(one.is_d3_word(&[]).unwrap());
        let nfa = fig1_right();
        assert!(!nfa.is_carefully_sync_word(&[]).unwrap());
        assert!(!nfa.is_d3_word(&[]).unwrap());
        assert!(!nfa.is_d2_word(&[]).unwrap());
    }

    #[test]
    fn everywhere_defined_symbol_examples() {
        assert_eq!(fig1_right().everywhere_defined_symbol(), Some(A));
        assert_eq!(fig2().everywhere_defined_symbol(), Some(0));
        let dead = Nfa::from_edges(2, 2, &[(2, 0, 1), (2, 1, 2)]).unwrap();
        assert_eq!(dead.everywhere_defined_symbol(), None);
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(fig2().preimages(1, 0).unwrap(), set(5, &[1, 5]));
        let only0 = Nfa::from_edges(2, 2, &[(1, 0, 2)]).unwrap();
        assert!(only0.preimages(2, 1).unwrap().is_empty());
        assert_eq!(fig1_right().preimages(1, C).unwrap(), set(3, &[2, 3]));
        assert!(fig2().preimages(6, 0).is_err());
    }

    #[test]
    fn construction_rejects_bad_tables() {
        assert_eq!(
            Nfa::new(2, 1, vec![vec![vec![3]], vec![vec![]]]),
            Err(NfaError::StateOutOfRange { state: 3, states: 2 })
        );
        assert_eq!(Nfa::new(0, 1, vec![]), Err(NfaError::NoStates));
        assert!(matches!(Nfa::new(1, 2, vec![vec![vec![1]]]), Err(NfaError::Shape { .. })));
        let nfa = Nfa::new(2, 1, vec![vec![vec![2, 1, 2]], vec![vec![]]]).unwrap();
        assert_eq!(nfa.successors(1, 0), &[1, 2]);
        assert_eq!(nfa.transition_count(), 2);
    }

    #[test]
    fn word_display_round_trip() {
        assert_eq!(w("0110").to_string(), "0110");
        let big = Word::new(vec![0, 11, 2]);
        assert_eq!(big.to_string(), "0.11.2");
        assert_eq!(big.to_string().parse::<Word>().unwrap(), big);
        assert!("0x1".parse::<Word>().is_err());
    }

    #[test]
    fn swap_exchanges_the_binary_symbols() {
        let nfa = bin3();
        let sw = nfa.swap_binary_symbols();
        assert_eq!(sw.successors(1, 1), nfa.successors(1, 0));
        assert_eq!(sw.swap_binary_symbols(), nfa);
    }

    fn arb_case() -> impl Strategy<Value = (Nfa, Vec<Symbol>, Vec<Symbol>)> {
        arb_nfa(6, 2).prop_flat_map(|nfa| {
            (
                Just(nfa),
                proptest::collection::vec(0..2usize, 0..4),
                proptest::collection::vec(0..2usize, 0..4),
            )
        })
    }

    proptest! {
        #[test]
        fn specialization_chain((nfa, u, v) in arb_case()) {
            let word: Vec<Symbol> = u.iter().chain(&v).copied().collect();
            if nfa.is_carefully_sync_word(&word).unwrap() && !word.is_empty() {
                prop_assert!(nfa.is_d1_word(&word).unwrap());
            }
            if nfa.is_d1_word(&word).unwrap() {
                prop_assert!(nfa.is_d2_word(&word).unwrap());
            }
            if nfa.is_d2_word(&word).unwrap() {
                prop_assert!(nfa.is_d3_word(&word).unwrap());
            }
        }

        #[test]
        fn apply_word_splits((nfa, u, v) in arb_case()) {
            let all = StateSet::full(nfa.states());
            let uv: Vec<Symbol> = u.iter().chain(&v).copied().collect();
            let direct = nfa.apply_word(&all, &uv).unwrap();
            let staged = nfa.apply_word(&nfa.apply_word(&all, &u).unwrap(), &v).unwrap();
            prop_assert_eq!(direct, staged);
        }

        #[test]
        fn preimages_mirror_images(nfa in arb_nfa(6, 2)) {
            for q in 1..=nfa.states() {
                for s in 0..2 {
                    let img = nfa.apply_symbol(&StateSet::singleton(nfa.states(), q), s).unwrap();
                    for p in 1..=nfa.states() {
                        prop_assert_eq!(img.contains(p), nfa.preimages(p, s).unwrap().contains(q));
                    }
                }
            }
        }

        #[test]
        fn total_symbol_extends_d3_words((nfa, u, _v) in arb_case()) {
            if let Some(s0) = nfa.everywhere_defined_symbol() {
                if nfa.is_d3_word(&u).unwrap() {
                    let mut longer = u.clone();
                    longer.push(s0);
                    prop_assert!(nfa.is_d3_word(&longer).unwrap());
                }
            }
        }
    }
}
