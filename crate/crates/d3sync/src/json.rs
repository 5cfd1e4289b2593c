//! The NFA JSON format: `{"n": 3, "alphabet": 2, "delta": [[[1, 2], []], …]}`
//! with `delta[q - 1][s]` the 1-based successors of state `q` under `s`.

use std::fs;
use std::path::Path;

use d3sync_core::nfa::{Nfa, NfaError, State};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfaJson {
    pub n: usize,
    pub alphabet: usize,
    pub delta: Vec<Vec<Vec<State>>>,
}

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed NFA JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid NFA: {0}")]
    Nfa(#[from] NfaError),
}

impl From<&Nfa> for NfaJson {
    fn from(nfa: &Nfa) -> Self {
        NfaJson {
            n: nfa.states(),
            alphabet: nfa.alphabet(),
            delta: nfa.delta(),
        }
    }
}

impl TryFrom<NfaJson> for Nfa {
    type Error = NfaError;

    fn try_from(j: NfaJson) -> Result<Nfa, NfaError> {
        Nfa::new(j.n, j.alphabet, j.delta)
    }
}

pub fn parse_nfa(text: &str) -> Result<Nfa, JsonError> {
    let raw: NfaJson = serde_json::from_str(text)?;
    Ok(Nfa::try_from(raw)?)
}

pub fn read_nfa(path: &Path) -> Result<Nfa, JsonError> {
    let text = fs::read_to_string(path).map_err(|source| JsonError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_nfa(&text)
}

/// Compact single-line JSON.
pub fn nfa_to_json(nfa: &Nfa) -> String {
    serde_json::to_string(&NfaJson::from(nfa)).expect("plain data serializes")
}

pub fn write_nfa(path: &Path, nfa: &Nfa) -> std::io::Result<()> {
    fs::write(path, nfa_to_json(nfa) + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n": 3, "alphabet": 2, "delta": [[[2, 1], []], [[3], [3]], [[], [1, 2, 3]]]}"#;
        let nfa = parse_nfa(text).unwrap();
        assert_eq!(nfa.successors(1, 0), &[1, 2]);
        assert_eq!(parse_nfa(&nfa_to_json(&nfa)).unwrap(), nfa);
    }

    #[test]
    fn rejects_bad_input() {
        let out_of_range = r#"{"n": 2, "alphabet": 2, "delta": [[[3], []], [[], []]]}"#;
        assert!(matches!(parse_nfa(out_of_range), Err(JsonError::Nfa(NfaError::StateOutOfRange { .. }))));
        let zero = r#"{"n": 1, "alphabet": 1, "delta": [[[0]]]}"#;
        assert!(matches!(parse_nfa(zero), Err(JsonError::Nfa(_))));
        let short = r#"{"n": 2, "alphabet": 2, "delta": [[[1], []]]}"#;
        assert!(matches!(parse_nfa(short), Err(JsonError::Nfa(NfaError::Shape { .. }))));
        assert!(matches!(parse_nfa("{"), Err(JsonError::Syntax(_))));
        assert!(matches!(parse_nfa(r#"{"n": 1, "alphabet": 1, "delta": [[[1]]], "x": 0}"#), Err(JsonError::Syntax(_))));
    }
}
