//! Batches of random automata with a manifest.

use std::fs;
use std::path::Path;

use d3sync_core::nfa::Nfa;
use d3sync_core::random::{self, CardinalitySampler, ModelKind};
use serde::{Deserialize, Serialize};

use crate::json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub attempt: u64,
    pub seed: u64,
    pub passes_filter: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub lambda: Option<f64>,
    pub n: usize,
    pub seed: u64,
    /// Only filter-passing automata were kept.
    pub filtered_only: bool,
    pub attempts: u64,
    pub passed: usize,
    pub pass_probability: f64,
    pub entries: Vec<ManifestEntry>,
}

/// `count` automata with seeds `derive_seed(seed, attempt)`. With
/// `filtered_only`, attempts failing the filter are skipped until `count`
/// automata pass.
pub fn generate_batch(kind: ModelKind, n: usize, count: usize, seed: u64, filtered_only: bool) -> (Manifest, Vec<Nfa>) {
    let sampler = CardinalitySampler::new(kind, n);
    let mut entries = Vec::with_capacity(count);
    let mut nfas = Vec::with_capacity(count);
    let mut attempt = 0u64;
    let mut passed = 0;
    while nfas.len() < count {
        let s = random::derive_seed(seed, attempt);
        attempt += 1;
        if filtered_only && !random::passes_filter_fast(&sampler, s) {
            continue;
        }
        let nfa = random::generate_with(&sampler, s);
        let ok = random::passes_filter(&nfa);
        passed += usize::from(ok);
        entries.push(ManifestEntry {
            file: format!("nfa_{:05}.json", nfas.len()),
            attempt: attempt - 1,
            seed: s,
            passes_filter: ok,
        });
        nfas.push(nfa);
    }
    let manifest = Manifest {
        model: kind.name().into(),
        lambda: kind.lambda(),
        n,
        seed,
        filtered_only,
        attempts: attempt,
        passed,
        pass_probability: random::prob_filter(kind, n),
        entries,
    };
    (manifest, nfas)
}

pub fn write_batch(dir: &Path, manifest: &Manifest, nfas: &[Nfa]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (entry, nfa) in manifest.entries.iter().zip(nfas) {
        json::write_nfa(&dir.join(&entry.file), nfa)?;
    }
    let text = serde_json::to_string_pretty(manifest).expect("plain data serializes");
    fs::write(dir.join("manifest.json"), text + "\n")
}
