//! Clause databases in the DIMACS literal convention.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroI32;
use core::ops::Not;

use thiserror::Error;

/// A literal: positive for a variable, negative for its negation.
/// Variables are numbered from 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(NonZeroI32);

impl Lit {
    pub fn pos(var: u32) -> Lit {
        Lit(NonZeroI32::new(var as i32).expect("variables are numbered from 1"))
    }

    pub fn neg(var: u32) -> Lit {
        !Lit::pos(var)
    }

    pub fn with_sign(var: u32, positive: bool) -> Lit {
        if positive {
            Lit::pos(var)
        } else {
            Lit::neg(var)
        }
    }

    pub fn from_dimacs(v: i32) -> Option<Lit> {
        NonZeroI32::new(v).map(Lit)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0.get()
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs().get()
    }

    pub fn is_positive(self) -> bool {
        self.0.get() > 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonempty disjunction of literals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// # Panics
    ///
    /// Panics on an empty literal list.
    pub fn new(lits: Vec<Lit>) -> Clause {
        assert!(!lits.is_empty(), "clauses are nonempty");
        Clause(lits)
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause(vec![lit])
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_satisfied_by(&self, model: &Model) -> bool {
        self.0.iter().any(|&l| model.satisfies(l))
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("empty clause")]
    EmptyClause,
    #[error("literal {lit} refers to variable {var} above the declared count {num_vars}")]
    VariableOutOfRange { lit: i32, var: u32, num_vars: u32 },
}

/// A variable count together with a clause list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: u32) -> Cnf {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn push(&mut self, clause: Clause) -> Result<(), CnfError> {
        if clause.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        if let Some(&bad) = clause.lits().iter().find(|l| l.var() > self.num_vars) {
            return Err(CnfError::VariableOutOfRange {
                lit: bad.to_dimacs(),
                var: bad.var(),
                num_vars: self.num_vars,
            });
        }
        self.clauses.push(clause);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Clause>>(&mut self, clauses: I) -> Result<(), CnfError> {
        clauses.into_iter().try_for_each(|c| self.push(c))
    }

    /// Index of the first clause the model falsifies.
    pub fn first_falsified(&self, model: &Model) -> Option<usize> {
        self.clauses.iter().position(|c| !c.is_satisfied_by(model))
    }

    pub fn is_satisfied_by(&self, model: &Model) -> bool {
        self.first_falsified(model).is_none()
    }
}

/// A total assignment to variables `1..=num_vars`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn all_false(num_vars: u32) -> Model {
        Model(vec![false; num_vars as usize])
    }

    pub fn from_values(values: Vec<bool>) -> Model {
        Model(values)
    }

    /// From DIMACS literals; unmentioned variables default to false and
    /// literals above `num_vars` are ignored.
    pub fn from_lits<I: IntoIterator<Item = Lit>>(num_vars: u32, lits: I) -> Model {
        let mut m = Model::all_false(num_vars);
        for l in lits {
            if l.var() <= num_vars {
                m.set(l.var(), l.is_positive());
            }
        }
        m
    }

    pub fn num_vars(&self) -> u32 {
        self.0.len() as u32
    }

    /// # Panics
    ///
    /// Panics if `var` is 0 or above the variable count.
    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0[var as usize - 1] = value;
    }

    pub fn satisfies(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    /// The model as DIMACS literals `±1 … ±n`.
    pub fn to_lits(&self) -> Vec<Lit> {
        (1..=self.num_vars()).map(|v| Lit::with_sign(v, self.value(v))).collect()
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_lits()).finish()
    }
}

/// A falsified clause met while propagating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub clause: usize,
}

/// Exhaustive unit propagation from a set of fixed literals, independent of
/// the CDCL engine. Returns the resulting partial assignment, indexed by
/// variable − 1.
pub fn unit_propagate(cnf: &Cnf, fixed: &[Lit]) -> Result<Vec<Option<bool>>, Conflict> {
    let mut values: Vec<Option<bool>> = vec![None; cnf.num_vars() as usize];
    let value = |values: &[Option<bool>], l: Lit| values[l.var() as usize - 1].map(|v| v == l.is_positive());
    for &l in fixed {
        match value(&values, l) {
            Some(false) => return Err(Conflict { clause: usize::MAX }),
            _ => values[l.var() as usize - 1] = Some(l.is_positive()),
        }
    }
    loop {
        let mut changed = false;
        for (ci, clause) in cnf.clauses().iter().enumerate() {
            let mut unassigned = None;
            let mut open = 0;
            let mut satisfied = false;
            for &l in clause.lits() {
                match value(&values, l) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open += 1;
                        unassigned = Some(l);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (open, unassigned) {
                (0, _) => return Err(Conflict { clause: ci }),
                (1, Some(l)) => {
                    values[l.var() as usize - 1] = Some(l.is_positive());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Ok(values);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        let l = Lit::from_dimacs(-7).unwrap();
        assert_eq!(l.var(), 7);
        assert!(!l.is_positive());
        assert_eq!(!l, Lit::pos(7));
        assert!(Lit::from_dimacs(0).is_none());
    }

    #[test]
    fn push_validates() {
        let mut cnf = Cnf::new(2);
        assert!(cnf.push(Clause::new(vec![Lit::pos(1), Lit::neg(2)])).is_ok());
        assert_eq!(
            cnf.push(Clause::unit(Lit::neg(3))),
            Err(CnfError::VariableOutOfRange { lit: -3, var: 3, num_vars: 2 })
        );
    }

    #[test]
    fn evaluation_and_propagation() {
        let mut cnf = Cnf::new(3);
        cnf.push(Clause::new(vec![Lit::neg(1), Lit::pos(2)])).unwrap();
        cnf.push(Clause::new(vec![Lit::neg(2), Lit::pos(3)])).unwrap();
        let vals = unit_propagate(&cnf, &[Lit::pos(1)]).unwrap();
        assert_eq!(vals, vec![Some(true), Some(true), Some(true)]);
        let m = Model::from_lits(3, [Lit::pos(1)]);
        assert_eq!(cnf.first_falsified(&m), Some(0));
        assert!(unit_propagate(&cnf, &[Lit::pos(1), Lit::neg(3)]).is_err());
    }
}
