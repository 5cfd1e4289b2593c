//! A conflict-driven clause-learning SAT solver and the backend abstraction
//! the length search talks to.
//!
//! Two watched literals per clause with blocker literals, first-UIP
//! learning with local minimization, VSIDS activities (ties broken towards
//! the lower variable index, so the search is fully deterministic), phase
//! saving, Luby restarts and activity-based learnt clause deletion.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use thiserror::Error;

use crate::cnf::{Clause, Cnf, Lit, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
    /// Filled in by backends that can read a clock.
    pub wall_time: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff `status` is `Sat`; always satisfies the input.
    pub model: Option<Model>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("conflict budget of {budget} exhausted: satisfiability unknown")]
    Unknown { budget: u64 },
    #[error("claimed model falsifies clause #{clause}")]
    ModelRejected { clause: usize },
    #[error("{0}")]
    Backend(String),
}

/// Anything that decides a CNF and hands back a verified model.
pub trait SatBackend {
    fn solve(&mut self, cnf: &Cnf) -> Result<SolveResult, SolveError>;
}

impl<B: SatBackend + ?Sized> SatBackend for &mut B {
    fn solve(&mut self, cnf: &Cnf) -> Result<SolveResult, SolveError> {
        (**self).solve(cnf)
    }
}

/// Checks a model against every clause.
pub fn verify_model(cnf: &Cnf, model: &Model) -> Result<(), SolveError> {
    match cnf.first_falsified(model) {
        None => Ok(()),
        Some(clause) => Err(SolveError::ModelRejected { clause }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Conflicts allowed before giving up with [`SolveError::Unknown`].
    pub conflict_budget: u64,
    /// Conflicts per unit of the Luby restart sequence.
    pub restart_unit: u64,
    pub var_decay: f64,
    pub clause_decay: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            conflict_budget: 10_000_000,
            restart_unit: 100,
            var_decay: 0.95,
            clause_decay: 0.999,
        }
    }
}

/// The built-in solver. Each call to `solve` runs a fresh search.
#[derive(Debug, Clone, Default)]
pub struct InternalSolver {
    pub config: SolverConfig,
}

impl InternalSolver {
    pub fn new(config: SolverConfig) -> Self {
        InternalSolver { config }
    }
}

impl SatBackend for InternalSolver {
    fn solve(&mut self, cnf: &Cnf) -> Result<SolveResult, SolveError> {
        let mut engine = Engine::new(cnf.num_vars() as usize, self.config);
        let status = engine.run(cnf)?;
        let model = match status {
            SolveStatus::Sat => {
                let model = engine.model();
                verify_model(cnf, &model)?;
                Some(model)
            }
            SolveStatus::Unsat => None,
        };
        Ok(SolveResult {
            status,
            model,
            stats: engine.stats,
        })
    }
}

/// Solves with the default configuration.
pub fn solve_internal(cnf: &Cnf) -> Result<SolveResult, SolveError> {
    InternalSolver::default().solve(cnf)
}

/// All distinct restrictions of satisfying assignments to `vars`, found by
/// repeatedly solving and blocking the last restriction. Stops after
/// `limit` restrictions.
pub fn enumerate_projections<B: SatBackend>(
    backend: &mut B,
    cnf: &Cnf,
    vars: &[u32],
    limit: usize,
) -> Result<Vec<Vec<bool>>, SolveError> {
    let mut work = cnf.clone();
    let mut found = Vec::new();
    while found.len() < limit {
        let res = backend.solve(&work)?;
        let Some(model) = res.model else { break };
        let values: Vec<bool> = vars.iter().map(|&v| model.value(v)).collect();
        if vars.is_empty() {
            found.push(values);
            break;
        }
        let block = vars.iter().zip(&values).map(|(&v, &b)| Lit::with_sign(v, !b)).collect();
        work.push(Clause::new(block)).map_err(|e| SolveError::Backend(alloc::format!("{e}")))?;
        found.push(values);
    }
    Ok(found)
}

// ---------------------------------------------------------------------------
// engine

// internal literal code: 2 * var + sign, var 0-based, sign 1 = negative
type ILit = u32;

const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;

fn ilit(l: Lit) -> ILit {
    ((l.var() - 1) << 1) | (!l.is_positive()) as u32
}

#[inline]
fn ivar(l: ILit) -> usize {
    (l >> 1) as usize
}

#[inline]
fn ineg(l: ILit) -> ILit {
    l ^ 1
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: ILit,
}

struct StoredClause {
    lits: Vec<ILit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

enum SearchEnd {
    Sat,
    Unsat,
    Restart,
}

struct Engine {
    config: SolverConfig,
    num_vars: usize,
    clauses: Vec<StoredClause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watch>>,
    // per variable: 0 false, 1 true, UNDEF
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    max_learnts: f64,
    stats: SolveStats,
}

impl Engine {
    fn new(num_vars: usize, config: SolverConfig) -> Self {
        Engine {
            config,
            num_vars,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            phase: vec![false; num_vars],
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::new(num_vars),
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; num_vars],
            max_learnts: 0.0,
            stats: SolveStats::default(),
        }
    }

    /// 1 true, 0 false, UNDEF unassigned.
    #[inline]
    fn value(&self, l: ILit) -> u8 {
        let a = self.assigns[ivar(l)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l & 1) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: ILit, reason: u32) {
        let v = ivar(l);
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = (l & 1 == 0) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watch { cref, blocker: lits[0] });
        self.clauses.push(StoredClause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        cref
    }

    /// Loads the problem. Returns false if it is trivially unsatisfiable.
    fn load(&mut self, cnf: &Cnf) -> bool {
        for clause in cnf.clauses() {
            let mut lits: Vec<ILit> = clause.lits().iter().map(|&l| ilit(l)).collect();
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == ineg(w[1])) {
                continue;
            }
            // drop literals already false at level 0; skip satisfied clauses
            if lits.iter().any(|&l| self.value(l) == 1) {
                continue;
            }
            lits.retain(|&l| self.value(l) == UNDEF);
            match lits.len() {
                0 => return false,
                1 => self.enqueue(lits[0], NO_REASON),
                _ => {
                    self.attach(lits, false);
                }
            }
        }
        true
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = ineg(p);
            let mut ws = core::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                let lits = &mut self.clauses[cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let first_true = {
                    let a = self.assigns[ivar(first)];
                    a != UNDEF && a ^ (first & 1) as u8 == 1
                };
                if first != w.blocker && first_true {
                    ws[j] = Watch { cref: w.cref, blocker: first };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let a = self.assigns[ivar(l)];
                    if a == UNDEF || a ^ (l & 1) as u8 == 1 {
                        lits.swap(1, k);
                        let new_watch = lits[1];
                        self.watches[new_watch as usize].push(Watch { cref: w.cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch { cref: w.cref, blocker: first };
                j += 1;
                match self.value(first) {
                    0 => {
                        conflict = Some(w.cref);
                        while i < ws.len() {
                            ws[j] = ws[i];
                            i += 1;
                            j += 1;
                        }
                    }
                    UNDEF => self.enqueue(first, w.cref),
                    _ => {}
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &lr in &self.learnts {
                self.clauses[lr as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<ILit>, u32) {
        let mut learnt: Vec<ILit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<ILit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = ivar(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[ivar(self.trail[index])] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            confl = self.reason[ivar(pl)];
            self.seen[ivar(pl)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = ineg(p.expect("conflict analysis visits at least one literal"));

        // local minimization: drop literals implied by the rest
        let marked: Vec<ILit> = learnt[1..].to_vec();
        let mut kept = 1;
        for k in 1..learnt.len() {
            let l = learnt[k];
            let r = self.reason[ivar(l)];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|&q| self.seen[ivar(q)] || self.level[ivar(q)] == 0);
            if !redundant {
                learnt[kept] = l;
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in marked {
            self.seen[ivar(l)] = false;
        }

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[ivar(learnt[k])] > self.level[ivar(learnt[max_i])] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[ivar(learnt[1])]
        };
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = ivar(l);
            self.phase[v] = l & 1 == 0;
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<ILit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(((v as u32) << 1) | (!self.phase[v]) as u32);
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let c = &self.clauses[cref as usize];
        let first = c.lits[0];
        self.reason[ivar(first)] == cref && self.value(first) == 1
    }

    fn reduce_db(&mut self) {
        let mut order = core::mem::take(&mut self.learnts);
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            ca.activity
                .partial_cmp(&cb.activity)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let half = order.len() / 2;
        let mut keep = Vec::with_capacity(order.len());
        for (k, &cref) in order.iter().enumerate() {
            let c = &self.clauses[cref as usize];
            if k < half && c.lits.len() > 2 && !self.locked(cref) {
                let c = &mut self.clauses[cref as usize];
                c.deleted = true;
                c.lits = Vec::new();
            } else {
                keep.push(cref);
            }
        }
        keep.sort_unstable();
        self.learnts = keep;
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    fn search(&mut self, budget_for_restart: u64) -> Result<SearchEnd, SolveError> {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    return Ok(SearchEnd::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.learnts.push(cref);
                    self.bump_clause(cref);
                    self.enqueue(first, cref);
                }
                self.stats.learnt_clauses += 1;
                self.var_inc /= self.config.var_decay;
                self.cla_inc /= self.config.clause_decay;
                if self.stats.conflicts >= self.config.conflict_budget {
                    return Err(SolveError::Unknown {
                        budget: self.config.conflict_budget,
                    });
                }
            } else {
                if local_conflicts >= budget_for_restart {
                    self.cancel_until(0);
                    return Ok(SearchEnd::Restart);
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                match self.pick_branch() {
                    None => return Ok(SearchEnd::Sat),
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }

    fn run(&mut self, cnf: &Cnf) -> Result<SolveStatus, SolveError> {
        if !self.load(cnf) || self.propagate().is_some() {
            return Ok(SolveStatus::Unsat);
        }
        for v in 0..self.num_vars {
            self.heap.insert(v, &self.activity);
        }
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(1000.0);
        let mut round = 0u64;
        loop {
            let limit = luby(2.0, round) * self.config.restart_unit as f64;
            match self.search(limit as u64)? {
                SearchEnd::Sat => return Ok(SolveStatus::Sat),
                SearchEnd::Unsat => return Ok(SolveStatus::Unsat),
                SearchEnd::Restart => {
                    round += 1;
                    self.stats.restarts += 1;
                    self.max_learnts *= 1.1;
                }
            }
        }
    }

    fn model(&self) -> Model {
        Model::from_values(self.assigns.iter().map(|&a| a == 1).collect())
    }
}

/// The Luby sequence `1, 1, 2, 1, 1, 2, 4, …` scaled by powers of `y`.
fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    libm::pow(y, seq as f64)
}

/// Max-heap of variables by activity; equal activities pop the lower index
/// first.
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![NOT_IN_HEAP; n],
        }
    }

    #[inline]
    fn better(a: usize, b: usize, act: &[f64]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.pos[v] != NOT_IN_HEAP {
            return;
        }
        self.pos[v] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.pos[v] != NOT_IN_HEAP {
            self.sift_up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(v, p, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(self.heap[r], self.heap[l], act) { r } else { l };
            if !Self::better(self.heap[c], v, act) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode_word, encode_basic};
    use crate::nfa::fixtures::*;
    use proptest::prelude::*;

    fn cnf(num_vars: u32, clauses: &[&[i32]]) -> Cnf {
        let mut c = Cnf::new(num_vars);
        for cl in clauses {
            c.push(Clause::new(cl.iter().map(|&v| Lit::from_dimacs(v).unwrap()).collect()))
                .unwrap();
        }
        c
    }

    fn brute_force_sat(c: &Cnf) -> bool {
        let n = c.num_vars();
        (0u64..1 << n).any(|bits| {
            let m = Model::from_values((0..n).map(|b| bits >> b & 1 == 1).collect());
            c.is_satisfied_by(&m)
        })
    }

    #[test]
    fn trivial_instances() {
        let empty = Cnf::new(3);
        let r = solve_internal(&empty).unwrap();
        assert_eq!(r.status, SolveStatus::Sat);
        assert_eq!(r.model.unwrap().num_vars(), 3);
        let contra = cnf(1, &[&[1], &[-1]]);
        let r = solve_internal(&contra).unwrap();
        assert_eq!(r.status, SolveStatus::Unsat);
        assert!(r.model.is_none());
    }

    #[test]
    fn single_state_encoding() {
        let enc = encode_basic(&self1(), 1).unwrap();
        let r = solve_internal(&enc.cnf).unwrap();
        let model = r.model.unwrap();
        assert!(!model.value(1));
        assert_eq!(decode_word(&enc.varmap, &model).unwrap(), w("0"));
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes
        let (p, h) = (5u32, 4u32);
        let var = |i: u32, j: u32| i * h + j + 1;
        let mut c = Cnf::new(p * h);
        for i in 0..p {
            c.push(Clause::new((0..h).map(|j| Lit::pos(var(i, j))).collect())).unwrap();
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    c.push(Clause::new(vec![Lit::neg(var(a, j)), Lit::neg(var(b, j))])).unwrap();
                }
            }
        }
        let r = solve_internal(&c).unwrap();
        assert_eq!(r.status, SolveStatus::Unsat);
        assert!(r.stats.conflicts > 0);
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let (p, h) = (7u32, 6u32);
        let var = |i: u32, j: u32| i * h + j + 1;
        let mut c = Cnf::new(p * h);
        for i in 0..p {
            c.push(Clause::new((0..h).map(|j| Lit::pos(var(i, j))).collect())).unwrap();
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    c.push(Clause::new(vec![Lit::neg(var(a, j)), Lit::neg(var(b, j))])).unwrap();
                }
            }
        }
        let mut s = InternalSolver::new(SolverConfig {
            conflict_budget: 10,
            ..SolverConfig::default()
        });
        assert_eq!(s.solve(&c), Err(SolveError::Unknown { budget: 10 }));
    }

    #[test]
    fn enumeration_counts_projections() {
        // x1 ∨ x2, free x3
        let c = cnf(3, &[&[1, 2]]);
        let all = enumerate_projections(&mut InternalSolver::default(), &c, &[1, 2], 10).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<f64> = (0..7).map(|i| luby(2.0, i)).collect();
        assert_eq!(seq, [1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn deterministic_runs() {
        let enc = encode_basic(&fig2(), 4).unwrap();
        let a = solve_internal(&enc.cnf).unwrap();
        let b = solve_internal(&enc.cnf).unwrap();
        assert_eq!(a, b);
    }

    fn arb_cnf() -> impl Strategy<Value = Cnf> {
        (1u32..=10).prop_flat_map(|n| {
            let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
            proptest::collection::vec(proptest::collection::vec(lit, 1..=4), 0..40).prop_map(move |cls| {
                let mut c = Cnf::new(n);
                for cl in cls {
                    c.push(Clause::new(cl.into_iter().map(|v| Lit::from_dimacs(v).unwrap()).collect()))
                        .unwrap();
                }
                c
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn agrees_with_brute_force(c in arb_cnf()) {
            let r = solve_internal(&c).unwrap();
            prop_assert_eq!(r.status == SolveStatus::Sat, brute_force_sat(&c));
            if let Some(m) = r.model {
                prop_assert!(c.is_satisfied_by(&m));
            }
        }
    }
}
