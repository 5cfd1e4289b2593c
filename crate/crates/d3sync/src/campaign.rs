//! Experiment campaigns: generate filtered automata, find their shortest
//! D3-synchronizing words, and aggregate the results.
//!
//! For each `n` the attempt seeds are `derive_seed(cell_seed, i)` for
//! `i = 0, 1, …` with `cell_seed = derive_seed(seed, n)`, and the first
//! `count_per_n` attempts that pass the filter become the cell's automata.
//! Filtering and solving run on a pool of `workers` threads, but which
//! attempts are kept and the order of the records depend only on the
//! configuration. Wall times go to a separate file so the record file is
//! reproducible byte for byte.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use d3sync_core::encoding::{EncodeError, Variant};
use d3sync_core::nfa::Nfa;
use d3sync_core::oracle::{shortest_d3_bfs, shortest_d3_sparse, OracleError};
use d3sync_core::random::{self, CardinalitySampler, ModelKind};
use d3sync_core::search::{self, SearchError, SearchMode, SearchOptions, Verdict};
use d3sync_core::stats::{fit_log_square, FitResult, Histogram};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::Backend;

/// Largest `n` for which records are cross-checked against the subset BFS.
pub const CROSS_CHECK_MAX_STATES: usize = 6;

/// Default bound on the searched length when the config gives none.
pub const DEFAULT_MAX_LENGTH: usize = 128;

/// Default for [`ExperimentConfig::oracle_max_sets`].
pub const DEFAULT_ORACLE_SETS: usize = 20_000;

const FILTER_BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Uniform,
    Poisson,
}

mod via_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_variant() -> Variant {
    Variant::Basic
}

fn default_mode() -> SearchMode {
    SearchMode::Binary
}

fn default_workers() -> usize {
    1
}

fn default_solver() -> String {
    "internal".into()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub n_list: Vec<usize>,
    pub count_per_n: usize,
    #[serde(default = "default_variant", with = "via_str")]
    pub variant: Variant,
    #[serde(default = "default_mode", with = "via_str")]
    pub mode: SearchMode,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// `"internal"` or an external solver command line.
    #[serde(default = "default_solver")]
    pub solver: String,
    /// Initial length guess; the search's default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<usize>,
    /// Longest word searched for: `min(2^n, max_length)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_length: Option<usize>,
    /// Check every record against an exact subset search: the dense one
    /// for `n ≤ 6`, the sparse one within `oracle_max_sets` above that.
    #[serde(default = "default_true")]
    pub cross_check: bool,
    /// Budget of the sparse subset search run before SAT on larger
    /// automata; 0 disables it. When it finishes it proves
    /// non-synchronization outright and cross-checks the SAT length.
    #[serde(default = "default_oracle_sets")]
    pub oracle_max_sets: usize,
}

fn default_oracle_sets() -> usize {
    DEFAULT_ORACLE_SETS
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("writing records: {0}")]
    Csv(#[from] csv::Error),
    #[error("reading config: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CampaignError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.model_kind()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, CampaignError> {
        Self::from_json(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn model_kind(&self) -> Result<ModelKind, CampaignError> {
        let kind = match (self.model, self.lambda) {
            (ModelName::Uniform, None) => ModelKind::Uniform,
            (ModelName::Uniform, Some(_)) => {
                return Err(CampaignError::Config("lambda only applies to the poisson model".into()))
            }
            (ModelName::Poisson, Some(lambda)) => ModelKind::Poisson { lambda },
            (ModelName::Poisson, None) => return Err(CampaignError::Config("poisson model needs lambda".into())),
        };
        for &n in &self.n_list {
            random::ModelSpec::new(kind, n, 0).map_err(|e| CampaignError::Config(e.to_string()))?;
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Synchronizing,
    NotSynchronizingUpTo,
    /// The subset search finished without reaching the full state set.
    NotSynchronizing,
    Error,
}

/// One filtered automaton and its search result. A row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub model: ModelName,
    pub lambda: Option<f64>,
    pub n: usize,
    /// Position among the cell's filtered automata.
    pub index: usize,
    pub attempt: u64,
    pub nfa_seed: u64,
    pub filter_passed: bool,
    /// Encoding actually used; `basic` when forced0 does not apply.
    pub variant: String,
    pub mode: String,
    pub status: RecordStatus,
    pub min_length: Option<usize>,
    pub witness: Option<String>,
    pub cap: Option<usize>,
    pub queries: usize,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub oracle_length: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub n: usize,
    pub index: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellScan {
    pub n: usize,
    pub filtered: usize,
    /// Attempts drawn up to and including the last kept one.
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub config: ExperimentConfig,
    pub cells: Vec<CellScan>,
    pub records: Vec<ExperimentRecord>,
    pub timings: Vec<Timing>,
}

/// Indices of the first `count` attempts passing the filter.
pub fn filtered_attempts(sampler: &CardinalitySampler, cell_seed: u64, count: usize, workers: usize) -> Vec<u64> {
    let workers = workers.max(1) as u64;
    let mut kept = Vec::with_capacity(count);
    let mut next_block = 0u64;
    while kept.len() < count {
        let round: Vec<Vec<u64>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let start = (next_block + w) * FILTER_BLOCK;
                    scope.spawn(move || {
                        (start..start + FILTER_BLOCK)
                            .filter(|&i| random::passes_filter_fast(sampler, random::derive_seed(cell_seed, i)))
                            .collect::<Vec<u64>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("filter worker panicked")).collect()
        });
        next_block += workers;
        for block in round {
            for i in block {
                if kept.len() < count {
                    kept.push(i);
                }
            }
        }
    }
    kept
}

struct Task {
    n: usize,
    index: usize,
    attempt: u64,
    seed: u64,
    sampler_slot: usize,
}

pub fn run_campaign(config: &ExperimentConfig) -> Result<Campaign, CampaignError> {
    let kind = config.model_kind()?;
    let timeout = match std::env::var(crate::external::TIMEOUT_ENV) {
        Ok(v) => Some(crate::external::parse_timeout(&v).map_err(|e| CampaignError::Config(e.to_string()))?),
        Err(_) => None,
    };
    let backend = Backend::from_choice(Some(&config.solver), timeout).map_err(|e| CampaignError::Config(e.to_string()))?;
    if config.l0 == Some(0) {
        return Err(CampaignError::Config("l0 must be at least 1".into()));
    }

    let samplers: Vec<CardinalitySampler> = config.n_list.iter().map(|&n| CardinalitySampler::new(kind, n)).collect();
    let mut cells = Vec::new();
    let mut tasks = Vec::new();
    for (slot, &n) in config.n_list.iter().enumerate() {
        let cell_seed = random::derive_seed(config.seed, n as u64);
        let kept = filtered_attempts(&samplers[slot], cell_seed, config.count_per_n, config.workers);
        cells.push(CellScan {
            n,
            filtered: kept.len(),
            attempts: kept.last().map_or(0, |&a| a + 1),
        });
        for (index, &attempt) in kept.iter().enumerate() {
            tasks.push(Task {
                n,
                index,
                attempt,
                seed: random::derive_seed(cell_seed, attempt),
                sampler_slot: slot,
            });
        }
    }

    let results: Mutex<Vec<Option<(ExperimentRecord, Timing)>>> = Mutex::new(vec![None; tasks.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..config.workers.max(1) {
            let mut backend = backend.clone();
            let (tasks, samplers, results, next) = (&tasks, &samplers, &results, &next);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(k) else { break };
                let nfa = random::generate_with(&samplers[task.sampler_slot], task.seed);
                let started = Instant::now();
                let record = solve_one(config, &nfa, task, &mut backend);
                let timing = Timing {
                    n: task.n,
                    index: task.index,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                };
                results.lock().expect("result slots")[k] = Some((record, timing));
            });
        }
    });
    let (records, timings) = results
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .unzip();
    Ok(Campaign {
        config: config.clone(),
        cells,
        records,
        timings,
    })
}

fn solve_one(config: &ExperimentConfig, nfa: &Nfa, task: &Task, backend: &mut Backend) -> ExperimentRecord {
    let cap = search::default_cap(nfa, config.max_length.unwrap_or(DEFAULT_MAX_LENGTH));
    let mut variant = config.variant;
    if variant == Variant::ForcedFirstZero
        && d3sync_core::encoding::forced_first_symbol(nfa) == Err(EncodeError::BothSymbolsTotal)
    {
        variant = Variant::Basic;
    }
    let options = SearchOptions {
        l0: config.l0,
        mode: config.mode,
        variant,
        cap: Some(cap),
    };
    let mut record = ExperimentRecord {
        model: config.model,
        lambda: config.lambda,
        n: task.n,
        index: task.index,
        attempt: task.attempt,
        nfa_seed: task.seed,
        filter_passed: random::passes_filter(nfa),
        variant: variant.to_string(),
        mode: config.mode.to_string(),
        status: RecordStatus::Error,
        min_length: None,
        witness: None,
        cap: None,
        queries: 0,
        decisions: 0,
        propagations: 0,
        conflicts: 0,
        oracle_length: None,
        error: None,
    };
    let oracle = if !config.cross_check {
        None
    } else if nfa.states() <= CROSS_CHECK_MAX_STATES {
        Some(shortest_d3_bfs(nfa).map_err(|e| e.to_string()))
    } else if config.oracle_max_sets > 0 {
        match shortest_d3_sparse(nfa, config.oracle_max_sets) {
            Err(OracleError::SetLimit { .. }) => None,
            other => Some(other.map_err(|e| e.to_string())),
        }
    } else {
        None
    };
    let oracle = match oracle {
        Some(Ok(truth)) => Some(truth.map(|t| t.length)),
        Some(Err(e)) => {
            record.error = Some(e);
            return record;
        }
        None => None,
    };
    if oracle == Some(None) && nfa.states() > CROSS_CHECK_MAX_STATES {
        // no word of any length: nothing for the search to find
        record.status = RecordStatus::NotSynchronizing;
        return record;
    }
    record.oracle_length = oracle.flatten();
    match search::find_min_length(nfa, &options, backend) {
        Ok(out) => {
            record.queries = out.queries;
            record.decisions = out.stats.decisions;
            record.propagations = out.stats.propagations;
            record.conflicts = out.stats.conflicts;
            match out.verdict {
                Verdict::MinimalLength { length, witness } => {
                    record.status = RecordStatus::Synchronizing;
                    record.min_length = Some(length);
                    record.witness = Some(witness.to_string());
                }
                Verdict::NotSynchronizingUpTo { cap } => {
                    record.status = RecordStatus::NotSynchronizingUpTo;
                    record.cap = Some(cap);
                }
            }
        }
        Err(e) => record.error = Some(describe_search_error(&e)),
    }
    if let Some(truth) = oracle {
        let agrees = match record.status {
            RecordStatus::Synchronizing => record.min_length == truth,
            RecordStatus::NotSynchronizingUpTo => truth.is_none_or(|l| l > record.cap.unwrap_or(0)),
            RecordStatus::NotSynchronizing | RecordStatus::Error => true,
        };
        if !agrees {
            record.status = RecordStatus::Error;
            record.error = Some(format!("search disagrees with subset search (oracle length {truth:?})"));
        }
    }
    record
}

fn describe_search_error(e: &SearchError) -> String {
    match e {
        SearchError::Solver { length, source, .. } => format!("solver failed at length {length}: {source}"),
        other => other.to_string(),
    }
}

/// Histogram of one `n`, as written to `histograms.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: ModelName,
    pub lambda: Option<f64>,
    pub n: usize,
    pub filtered: usize,
    pub attempts: u64,
    /// Observed filter pass rate against the closed form.
    pub pass_rate: Option<f64>,
    pub pass_probability: f64,
    pub histogram: BTreeMap<usize, usize>,
    pub not_synchronizing: usize,
    pub errors: usize,
    pub mode: Option<usize>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub a: f64,
    pub b: f64,
    pub rss: f64,
}

impl From<FitResult> for FitJson {
    fn from(f: FitResult) -> Self {
        FitJson { a: f.a, b: f.b, rss: f.rss }
    }
}

/// Contents of `fits.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: ModelName,
    pub lambda: Option<f64>,
    pub points: Vec<FitPoint>,
    pub fit: Option<FitJson>,
    pub error: Option<String>,
}

pub fn histogram_of<'a, I: IntoIterator<Item = &'a ExperimentRecord>>(records: I) -> Histogram {
    Histogram::from_lengths(
        records
            .into_iter()
            .filter(|r| r.status != RecordStatus::Error)
            .map(|r| r.min_length),
    )
}

impl Campaign {
    pub fn kind(&self) -> ModelKind {
        self.config.model_kind().expect("validated before running")
    }

    pub fn cell_records(&self, n: usize) -> impl Iterator<Item = &ExperimentRecord> {
        self.records.iter().filter(move |r| r.n == n)
    }

    pub fn summaries(&self) -> Vec<CellSummary> {
        let kind = self.kind();
        self.cells
            .iter()
            .map(|cell| {
                let hist = histogram_of(self.cell_records(cell.n));
                CellSummary {
                    model: self.config.model,
                    lambda: self.config.lambda,
                    n: cell.n,
                    filtered: cell.filtered,
                    attempts: cell.attempts,
                    pass_rate: (cell.attempts > 0).then(|| cell.filtered as f64 / cell.attempts as f64),
                    pass_probability: random::prob_filter(kind, cell.n),
                    not_synchronizing: hist.not_synchronizing,
                    errors: self.cell_records(cell.n).filter(|r| r.status == RecordStatus::Error).count(),
                    mode: hist.mode(),
                    mean: hist.mean(),
                    histogram: hist.counts,
                }
            })
            .collect()
    }

    pub fn fit(&self) -> FitSummary {
        let points: Vec<FitPoint> = self
            .summaries()
            .iter()
            .filter_map(|c| c.mean.map(|mean| FitPoint { n: c.n, mean }))
            .collect();
        let raw: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.mean)).collect();
        let (fit, error) = match fit_log_square(&raw) {
            Ok(f) => (Some(f.into()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        FitSummary {
            model: self.config.model,
            lambda: self.config.lambda,
            points,
            fit,
            error,
        }
    }

    /// Writes `records.csv`, `histograms.json`, `fits.json`, `timings.csv`
    /// and a copy of the config into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CampaignError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut w = csv::Writer::from_path(dir.join("records.csv"))?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(io_err(dir))?;
        let mut t = csv::Writer::from_path(dir.join("timings.csv"))?;
        for r in &self.timings {
            t.serialize(r)?;
        }
        t.flush().map_err(io_err(dir))?;
        write_json(&dir.join("histograms.json"), &self.summaries())?;
        write_json(&dir.join("fits.json"), &self.fit())?;
        write_json(&dir.join("config.json"), &self.config)?;
        Ok(())
    }

    pub fn total_wall_time(&self) -> Duration {
        Duration::from_secs_f64(self.timings.iter().map(|t| t.wall_ms).sum::<f64>() / 1e3)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CampaignError> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, CampaignError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
