//! Ground truth that does not go through any CNF: the token game, an exact
//! shortest-word search over state subsets, and brute-force enumeration.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::nfa::{Nfa, NfaError, State, StateSet, Symbol, Word};

/// Largest automaton the subset search accepts.
pub const MAX_BFS_STATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("subset search supports at most {max} states, got {states}")]
    TooManyStates { states: usize, max: usize },
    #[error("more than {limit} state sets explored")]
    SetLimit { limit: usize },
    #[error(transparent)]
    Nfa(#[from] NfaError),
}

/// A position of the token game: which tokens each state holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenConfig {
    // held[j - 1] = tokens on state j
    held: Vec<StateSet>,
}

impl TokenConfig {
    /// Every state `q_i` holds exactly token `i`.
    pub fn initial(n: usize) -> Self {
        TokenConfig {
            held: (1..=n).map(|q| StateSet::singleton(n, q)).collect(),
        }
    }

    pub fn empty(n: usize) -> Self {
        TokenConfig {
            held: vec![StateSet::empty(n); n],
        }
    }

    pub fn states(&self) -> usize {
        self.held.len()
    }

    /// Tokens currently on state `j`.
    pub fn held_by(&self, j: State) -> &StateSet {
        &self.held[j - 1]
    }

    /// States currently holding token `i`.
    pub fn positions(&self, token: usize) -> StateSet {
        let n = self.states();
        let mut out = StateSet::empty(n);
        for j in 1..=n {
            if self.held[j - 1].contains(token) {
                out.insert(j);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.held.iter().all(StateSet::is_empty)
    }
}

/// One move: every token on `q` slides to all of `δ(q, s)`, and disappears
/// if that set is empty.
pub fn step_tokens(nfa: &Nfa, cfg: &TokenConfig, s: Symbol) -> Result<TokenConfig, NfaError> {
    nfa.check_symbol(s)?;
    let mut next = TokenConfig::empty(nfa.states());
    for q in 1..=nfa.states() {
        let tokens = cfg.held_by(q);
        if tokens.is_empty() {
            continue;
        }
        for &p in nfa.successors(q, s) {
            next.held[p - 1].union_with(tokens);
        }
    }
    Ok(next)
}

/// Plays `w` from the initial position.
pub fn run_game(nfa: &Nfa, w: &[Symbol]) -> Result<TokenConfig, NfaError> {
    w.iter()
        .try_fold(TokenConfig::initial(nfa.states()), |cfg, &s| step_tokens(nfa, &cfg, s))
}

/// A shortest D3-synchronizing word of positive length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestWord {
    pub length: usize,
    pub witness: Word,
}

/// Exact minimum via breadth-first search over subsets.
///
/// For a fixed meeting state `p`, let `X_k` be the set of states from which
/// `p` is reachable by reading the last `k` symbols of the word. Then
/// `X_0 = {p}`, `X_{k+1} = {q : δ(q, s) ∩ X_k ≠ ∅}` for the symbol `s` read
/// just before, and the word is D3-synchronizing with meeting state `p` iff
/// the walk reaches `X = Q`. Each target is an independent search over
/// `2^n` subsets; the overall answer is the minimum over targets, and the
/// witness is the reversed sequence of edge labels.
pub fn shortest_d3_bfs(nfa: &Nfa) -> Result<Option<ShortestWord>, OracleError> {
    let n = nfa.states();
    if n > MAX_BFS_STATES {
        return Err(OracleError::TooManyStates {
            states: n,
            max: MAX_BFS_STATES,
        });
    }
    let alphabet = nfa.alphabet();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let succ_masks: Vec<u32> = (1..=n)
        .flat_map(|q| (0..alphabet).map(move |s| (q, s)))
        .map(|(q, s)| nfa.successors(q, s).iter().fold(0u32, |m, &p| m | 1 << (p - 1)))
        .collect();
    let backward = |mask: u32, s: Symbol| -> u32 {
        (0..n).fold(0u32, |acc, q| {
            if succ_masks[q * alphabet + s] & mask != 0 {
                acc | 1 << q
            } else {
                acc
            }
        })
    };

    const UNSEEN: u32 = u32::MAX;
    let mut parent = vec![UNSEEN; 1usize << n];
    let mut label = vec![0u8; 1usize << n];
    let mut best: Option<ShortestWord> = None;
    let mut frontier = Vec::new();
    let mut next = Vec::new();

    for target in 0..n {
        parent.iter_mut().for_each(|p| *p = UNSEEN);
        let start = 1u32 << target;
        parent[start as usize] = start;
        frontier.clear();
        frontier.push(start);
        let mut depth = 0usize;
        let mut found: Option<(u32, Symbol)> = None;
        'search: while !frontier.is_empty() {
            depth += 1;
            if best.as_ref().is_some_and(|b| depth >= b.length) {
                break;
            }
            next.clear();
            for &x in &frontier {
                for s in 0..alphabet {
                    let y = backward(x, s);
                    if y == full {
                        found = Some((x, s));
                        break 'search;
                    }
                    if y != 0 && parent[y as usize] == UNSEEN {
                        parent[y as usize] = x;
                        label[y as usize] = s as u8;
                        next.push(y);
                    }
                }
            }
            core::mem::swap(&mut frontier, &mut next);
        }
        if let Some((mut x, last)) = found {
            // labels from the meeting state outwards are the word read backwards
            let mut word = vec![last];
            while x != start {
                word.push(label[x as usize] as Symbol);
                x = parent[x as usize];
            }
            best = Some(ShortestWord {
                length: word.len(),
                witness: Word(word),
            });
        }
    }
    Ok(best)
}

/// The same backward search as [`shortest_d3_bfs`], over only the subsets
/// actually met, so it is not limited to small `n`. Gives up once a single
/// target has produced more than `max_sets` subsets.
pub fn shortest_d3_sparse(nfa: &Nfa, max_sets: usize) -> Result<Option<ShortestWord>, OracleError> {
    let n = nfa.states();
    let backward = |x: &StateSet, s: Symbol| {
        let mut pre = StateSet::empty(n);
        for q in 1..=n {
            if nfa.image(q, s).intersects(x) {
                pre.insert(q);
            }
        }
        pre
    };
    let mut best: Option<ShortestWord> = None;
    for target in 1..=n {
        // (set, parent index, label)
        let mut nodes: Vec<(StateSet, usize, Symbol)> = vec![(StateSet::singleton(n, target), 0, 0)];
        let mut index = BTreeMap::new();
        index.insert(nodes[0].0.clone(), 0usize);
        let mut frontier = vec![0usize];
        let mut depth = 0;
        let mut found = None;
        'search: while !frontier.is_empty() {
            depth += 1;
            if best.as_ref().is_some_and(|b| depth >= b.length) {
                break;
            }
            let mut next = Vec::new();
            for &at in &frontier {
                for s in 0..nfa.alphabet() {
                    let pre = backward(&nodes[at].0, s);
                    if pre.is_full() {
                        found = Some((at, s));
                        break 'search;
                    }
                    if pre.is_empty() || index.contains_key(&pre) {
                        continue;
                    }
                    if nodes.len() >= max_sets {
                        return Err(OracleError::SetLimit { limit: max_sets });
                    }
                    index.insert(pre.clone(), nodes.len());
                    next.push(nodes.len());
                    nodes.push((pre, at, s));
                }
            }
            frontier = next;
        }
        if let Some((mut at, last)) = found {
            let mut word = vec![last];
            while at != 0 {
                word.push(nodes[at].2);
                at = nodes[at].1;
            }
            best = Some(ShortestWord {
                length: word.len(),
                witness: Word(word),
            });
        }
    }
    Ok(best)
}

/// Smallest `ℓ ≤ cap` with a D3-synchronizing word in `Σ^ℓ`, and the
/// lexicographically least such word. Checks every word.
pub fn shortest_d3_exhaustive(nfa: &Nfa, cap: usize) -> Result<Option<ShortestWord>, NfaError> {
    let k = nfa.alphabet();
    for len in 1..=cap {
        let mut word = vec![0; len];
        loop {
            if nfa.is_d3_word(&word)? {
                return Ok(Some(ShortestWord {
                    length: len,
                    witness: Word(word),
                }));
            }
            if !next_word(&mut word, k) {
                break;
            }
        }
    }
    Ok(None)
}

/// Every D3-synchronizing word of length exactly `len`, in lexicographic
/// order.
pub fn all_d3_words(nfa: &Nfa, len: usize) -> Result<Vec<Word>, NfaError> {
    let mut out = Vec::new();
    let mut word = vec![0; len];
    loop {
        if nfa.is_d3_word(&word)? {
            out.push(Word(word.clone()));
        }
        if !next_word(&mut word, nfa.alphabet()) {
            return Ok(out);
        }
    }
}

// lexicographic successor; false once every word has been visited
fn next_word(word: &mut [Symbol], alphabet: usize) -> bool {
    for pos in (0..word.len()).rev() {
        word[pos] += 1;
        if word[pos] < alphabet {
            return true;
        }
        word[pos] = 0;
    }
    false
}
