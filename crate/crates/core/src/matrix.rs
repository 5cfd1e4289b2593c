//! Boolean transition matrices. A word is D3-synchronizing exactly when the
//! product of its symbol matrices has a column of ones.

use alloc::vec::Vec;

use crate::nfa::{Nfa, NfaError, State, StateSet, Symbol};

/// Square 0/1 matrix over the states `1..=n`; row `q` holds the columns
/// `q'` with a one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    rows: Vec<StateSet>,
}

impl BoolMatrix {
    pub fn identity(n: usize) -> Self {
        BoolMatrix {
            rows: (1..=n).map(|q| StateSet::singleton(n, q)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: State, col: State) -> bool {
        self.rows[row - 1].contains(col)
    }

    pub fn row(&self, row: State) -> &StateSet {
        &self.rows[row - 1]
    }

    /// Product over the Boolean semiring (OR of ANDs).
    pub fn multiply(&self, rhs: &BoolMatrix) -> BoolMatrix {
        let n = self.size();
        assert_eq!(n, rhs.size(), "matrix sizes differ");
        let rows = (1..=n)
            .map(|i| {
                let mut out = StateSet::empty(n);
                for j in 1..=n {
                    if (1..=n).any(|k| self.get(i, k) && rhs.get(k, j)) {
                        out.insert(j);
                    }
                }
                out
            })
            .collect();
        BoolMatrix { rows }
    }

    /// Columns whose every entry is one.
    pub fn full_columns(&self) -> Vec<State> {
        let n = self.size();
        (1..=n).filter(|&j| (1..=n).all(|i| self.get(i, j))).collect()
    }
}

/// `M(s)`: entry `(q, q')` is one iff `q' ∈ δ(q, s)`.
pub fn symbol_matrix(nfa: &Nfa, s: Symbol) -> Result<BoolMatrix, NfaError> {
    nfa.check_symbol(s)?;
    Ok(BoolMatrix {
        rows: (1..=nfa.states()).map(|q| nfa.image(q, s).clone()).collect(),
    })
}

/// `M(a_1) · … · M(a_l)`; the identity for the empty word.
pub fn word_matrix(nfa: &Nfa, w: &[Symbol]) -> Result<BoolMatrix, NfaError> {
    let mut acc = BoolMatrix::identity(nfa.states());
    for &s in w {
        acc = acc.multiply(&symbol_matrix(nfa, s)?);
    }
    Ok(acc)
}

pub fn d3_by_matrix(nfa: &Nfa, w: &[Symbol]) -> Result<bool, NfaError> {
    Ok(!word_matrix(nfa, w)?.full_columns().is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfa::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn figure_one_column_of_ones() {
        let nfa = fig1_right();
        let m = word_matrix(&nfa, &[0]).unwrap();
        assert_eq!(m.row(1), &set(3, &[1]));
        assert_eq!(m.row(2), &set(3, &[1, 2]));
        assert_eq!(m.row(3), &set(3, &[1, 3]));
        assert_eq!(m.full_columns(), alloc::vec![1]);
        assert!(d3_by_matrix(&nfa, &[0]).unwrap());
    }

    #[test]
    fn empty_word_gives_identity() {
        let nfa = fig2();
        assert_eq!(word_matrix(&nfa, &[]).unwrap(), BoolMatrix::identity(5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn matrix_test_agrees_with_set_semantics(
            (nfa, w) in arb_nfa(6, 2).prop_flat_map(|nfa| (Just(nfa), proptest::collection::vec(0..2usize, 0..=5)))
        ) {
            prop_assert_eq!(d3_by_matrix(&nfa, &w).unwrap(), nfa.is_d3_word(&w).unwrap());
        }
    }
}
