//! Minimum-length search: encode, solve, and move the length bound.
//!
//! Binary mode follows the bracketing scheme `ℓ_min := 1`, `ℓ := ℓ0`,
//! `ℓ_max := 2ℓ0`. On SAT at `ℓ > ℓ_min` it sets `ℓ_max := ℓ` and
//! `ℓ := ⌊(ℓ_min + ℓ_max)/2⌋`; on UNSAT at `ℓ < ℓ_max` it sets
//! `ℓ_min := ℓ + 1` and `ℓ := ⌈(ℓ_min + ℓ_max)/2⌉`. SAT at `ℓ_min` is the
//! answer, UNSAT at `ℓ_max` means no word of length `≤ 2ℓ0`. Bisection is
//! sound only when SAT at `ℓ` implies SAT at `ℓ + 1`, which holds once some
//! symbol is defined everywhere (append it to any witness), so binary mode
//! refuses automata without such a symbol.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::encoding::{self, EncodeError, Encoding, Variant};
use crate::nfa::{Nfa, Word};
use crate::solver::{SatBackend, SolveError, SolveStats, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SearchMode {
    #[default]
    Binary,
    /// Ascending scan `ℓ = 1, 2, …`; the reference mode.
    Linear,
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Binary => "binary",
            SearchMode::Linear => "linear",
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchMode {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(SearchMode::Binary),
            "linear" => Ok(SearchMode::Linear),
            other => Err(alloc::format!("unknown search mode {other:?} (expected binary or linear)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Initial length guess; [`default_l0`] when unset.
    pub l0: Option<usize>,
    pub mode: SearchMode,
    pub variant: Variant,
    /// Largest length to try. In binary mode, exhausting `[1, 2ℓ0]` then
    /// doubles `ℓ0` and continues above the refuted range until this cap;
    /// without it the search stops at `2ℓ0`. Linear mode scans up to the
    /// cap, or `2ℓ0` when unset.
    pub cap: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            l0: None,
            mode: SearchMode::Binary,
            variant: Variant::Basic,
            cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub length: usize,
    pub status: SolveStatus,
    /// Answer reused from an earlier query at the same length.
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    MinimalLength { length: usize, witness: Word },
    NotSynchronizingUpTo { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub verdict: Verdict,
    pub trace: Vec<TraceEntry>,
    /// Solver invocations, including witness-recovery calls.
    pub queries: usize,
    pub l0: usize,
    pub stats: SolveStats,
}

impl SearchOutcome {
    pub fn min_length(&self) -> Option<usize> {
        match self.verdict {
            Verdict::MinimalLength { length, .. } => Some(length),
            Verdict::NotSynchronizingUpTo { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("no symbol is defined at every state; binary search needs one (use linear mode)")]
    FilterFailed,
    #[error("initial length guess must be at least 1")]
    ZeroStart,
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("solver failed at length {length}: {source}")]
    Solver {
        length: usize,
        source: SolveError,
        trace: Vec<TraceEntry>,
    },
    #[error("decoded word {witness} of length {length} is not D3-synchronizing")]
    WitnessRejected { length: usize, witness: Word },
    #[error("letter-free formula is satisfiable at length {length} but no D3-synchronizing word of that length exists")]
    RelaxationGap { length: usize },
}

/// `max(2, ⌈log₂ n⌉)`.
pub fn default_l0(states: usize) -> usize {
    let log = usize::BITS - states.saturating_sub(1).leading_zeros();
    (log as usize).max(2)
}

/// `min(2^n, hard_cap)`: every D3-synchronizing automaton with `n` states
/// has such a word of length at most `2^n`.
pub fn default_cap(nfa: &Nfa, hard_cap: usize) -> usize {
    let n = nfa.states();
    if n >= usize::BITS as usize - 1 {
        hard_cap
    } else {
        (1usize << n).min(hard_cap)
    }
}

/// Every UNSAT length in the trace lies below every SAT length.
pub fn trace_is_monotone(trace: &[TraceEntry]) -> bool {
    let max_unsat = trace
        .iter()
        .filter(|e| e.status == SolveStatus::Unsat)
        .map(|e| e.length)
        .max();
    let min_sat = trace.iter().filter(|e| e.status == SolveStatus::Sat).map(|e| e.length).min();
    match (max_unsat, min_sat) {
        (Some(u), Some(s)) => u < s,
        _ => true,
    }
}

pub fn find_min_length<B: SatBackend>(
    nfa: &Nfa,
    options: &SearchOptions,
    backend: &mut B,
) -> Result<SearchOutcome, SearchError> {
    find_min_length_with(nfa, options, backend, &mut |_| {})
}

/// As [`find_min_length`], calling `on_encoding` with every formula handed
/// to the backend.
pub fn find_min_length_with<B: SatBackend>(
    nfa: &Nfa,
    options: &SearchOptions,
    backend: &mut B,
    on_encoding: &mut dyn FnMut(&Encoding),
) -> Result<SearchOutcome, SearchError> {
    let l0 = options.l0.unwrap_or_else(|| default_l0(nfa.states()));
    if l0 == 0 {
        return Err(SearchError::ZeroStart);
    }
    if options.variant == Variant::ForcedFirstZero {
        encoding::forced_first_symbol(nfa)?;
    }
    let mut run = Run {
        nfa,
        variant: options.variant,
        backend,
        on_encoding,
        answers: BTreeMap::new(),
        trace: Vec::new(),
        queries: 0,
        stats: SolveStats::default(),
    };
    let verdict = match options.mode {
        SearchMode::Binary => {
            if nfa.everywhere_defined_symbol().is_none() {
                return Err(SearchError::FilterFailed);
            }
            run.binary(l0, options.cap)?
        }
        SearchMode::Linear => run.linear(options.cap.unwrap_or(2 * l0))?,
    };
    if let Verdict::MinimalLength { length, witness } = &verdict {
        debug_assert_eq!(witness.len(), *length);
    }
    Ok(SearchOutcome {
        verdict,
        trace: run.trace,
        queries: run.queries,
        l0,
        stats: run.stats,
    })
}

struct Run<'a, B> {
    nfa: &'a Nfa,
    variant: Variant,
    backend: &'a mut B,
    on_encoding: &'a mut dyn FnMut(&Encoding),
    answers: BTreeMap<usize, Option<Word>>,
    trace: Vec<TraceEntry>,
    queries: usize,
    stats: SolveStats,
}

impl<B: SatBackend> Run<'_, B> {
    fn binary(&mut self, l0: usize, cap: Option<usize>) -> Result<Verdict, SearchError> {
        let mut l0 = l0;
        let mut lmin = 1;
        let mut lmax = 2 * l0;
        let mut l = l0;
        if let Some(cap) = cap {
            lmax = lmax.min(cap.max(1));
            l = l.min(lmax);
        }
        loop {
            match self.ask(l)? {
                Some(witness) => {
                    if l == lmin {
                        return Ok(Verdict::MinimalLength { length: l, witness });
                    }
                    lmax = l;
                    l = (lmin + lmax) / 2;
                }
                None => {
                    if l < lmax {
                        lmin = l + 1;
                        l = (lmin + lmax).div_ceil(2);
                        continue;
                    }
                    match cap {
                        Some(cap) if lmax < cap => {
                            // nothing up to lmax: widen the bracket above it
                            l0 *= 2;
                            lmin = lmax + 1;
                            lmax = (2 * l0).min(cap);
                            l = (lmin + lmax).div_ceil(2);
                        }
                        _ => return Ok(Verdict::NotSynchronizingUpTo { cap: lmax }),
                    }
                }
            }
        }
    }

    fn linear(&mut self, cap: usize) -> Result<Verdict, SearchError> {
        for l in 1..=cap {
            if let Some(witness) = self.ask(l)? {
                return Ok(Verdict::MinimalLength { length: l, witness });
            }
        }
        Ok(Verdict::NotSynchronizingUpTo { cap })
    }

    /// SAT/UNSAT at length `l` as a verified witness or `None`.
    fn ask(&mut self, l: usize) -> Result<Option<Word>, SearchError> {
        if let Some(known) = self.answers.get(&l) {
            let known = known.clone();
            self.trace.push(TraceEntry {
                length: l,
                status: status_of(&known),
                cached: true,
            });
            return Ok(known);
        }
        let answer = match self.variant {
            Variant::Basic | Variant::ForcedFirstZero => self.solve_with_letters(l, self.variant)?,
            Variant::LetterFree => self.solve_letter_free(l)?,
        };
        self.trace.push(TraceEntry {
            length: l,
            status: status_of(&answer),
            cached: false,
        });
        self.answers.insert(l, answer.clone());
        Ok(answer)
    }

    fn call(&mut self, enc: &Encoding) -> Result<crate::solver::SolveResult, SearchError> {
        (self.on_encoding)(enc);
        self.queries += 1;
        let length = enc.varmap.length();
        let res = self.backend.solve(&enc.cnf).map_err(|source| SearchError::Solver {
            length,
            source,
            trace: self.trace.clone(),
        })?;
        let s = &mut self.stats;
        s.decisions += res.stats.decisions;
        s.propagations += res.stats.propagations;
        s.conflicts += res.stats.conflicts;
        s.restarts += res.stats.restarts;
        s.learnt_clauses += res.stats.learnt_clauses;
        if let Some(t) = res.stats.wall_time {
            s.wall_time = Some(s.wall_time.unwrap_or_default() + t);
        }
        Ok(res)
    }

    fn verified(&self, l: usize, witness: Word) -> Result<Word, SearchError> {
        if witness.len() == l && self.nfa.is_d3_word(&witness).unwrap_or(false) {
            Ok(witness)
        } else {
            Err(SearchError::WitnessRejected { length: l, witness })
        }
    }

    fn solve_with_letters(&mut self, l: usize, variant: Variant) -> Result<Option<Word>, SearchError> {
        let enc = encoding::encode(self.nfa, l, variant)?;
        let res = self.call(&enc)?;
        match res.model {
            None => Ok(None),
            Some(model) => {
                let witness = encoding::decode_word(&enc.varmap, &model)?;
                self.verified(l, witness).map(Some)
            }
        }
    }

    fn solve_letter_free(&mut self, l: usize) -> Result<Option<Word>, SearchError> {
        let enc = encoding::encode_letter_free(self.nfa, l)?;
        let res = self.call(&enc)?;
        let Some(model) = res.model else {
            return Ok(None);
        };
        if let Some(word) = encoding::letters_from_token_layers(self.nfa, &enc.varmap, &model)? {
            if self.nfa.is_d3_word(&word).unwrap_or(false) {
                return Ok(Some(word));
            }
        }
        // the model carries no usable word: ask the letter encoding for one
        match self.solve_with_letters(l, Variant::Basic)? {
            Some(word) => Ok(Some(word)),
            None => Err(SearchError::RelaxationGap { length: l }),
        }
    }
}

fn status_of(answer: &Option<Word>) -> SolveStatus {
    if answer.is_some() {
        SolveStatus::Sat
    } else {
        SolveStatus::Unsat
    }
}
