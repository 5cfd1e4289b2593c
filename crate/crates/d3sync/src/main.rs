use std::cell::RefCell;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use d3sync::backend::Backend;
use d3sync::campaign::{run_campaign, ExperimentConfig};
use d3sync::dimacs;
use d3sync::external::{parse_timeout, SOLVER_ENV, TIMEOUT_ENV};
use d3sync::generate::{generate_batch, write_batch};
use d3sync::json::read_nfa;
use d3sync_core::encoding::{self, Variant};
use d3sync_core::oracle::{shortest_d3_bfs, shortest_d3_exhaustive};
use d3sync_core::random::ModelKind;
use d3sync_core::search::{self, SearchError, SearchMode, SearchOptions, Verdict};
use d3sync_core::solver::{solve_internal, SolveStatus};
use serde_json::{json, Value};

const EXIT_SYNC: u8 = 0;
const EXIT_NOT_UP_TO_CAP: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "d3sync", version, about = "Shortest D3-synchronizing words of binary NFAs via SAT")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find the length of a shortest D3-synchronizing word.
    ///
    /// Exit status: 0 when a word was found, 1 when none exists up to the
    /// searched bound, 2 on errors.
    Minlen {
        nfa: PathBuf,
        /// Initial length guess [default: max(2, ceil(log2 n))]
        #[arg(long)]
        l0: Option<usize>,
        #[arg(long, default_value = "binary")]
        mode: SearchMode,
        #[arg(long, default_value = "basic")]
        variant: Variant,
        /// Longest length to try; lets binary mode search beyond 2*l0.
        #[arg(long)]
        cap: Option<usize>,
        /// Write every formula handed to the solver into this directory.
        #[arg(long, value_name = "DIR")]
        emit_dimacs: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Generate random automata and a manifest.
    Gen {
        #[arg(long)]
        model: ModelArg,
        /// Poisson rate.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Keep only automata with a symbol defined at every state.
        #[arg(long)]
        filtered: bool,
    },
    /// Exact shortest word without SAT.
    Oracle {
        nfa: PathBuf,
        #[arg(long, default_value = "bfs")]
        method: Method,
        /// Longest length the exhaustive method enumerates.
        #[arg(long, default_value_t = 12)]
        cap: usize,
    },
    /// Run an experiment campaign described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the DIMACS formula for one length.
    Encode {
        nfa: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value = "basic")]
        variant: Variant,
    },
    /// Solve a DIMACS file with the built-in solver, MiniSat style.
    ///
    /// Writes `SAT` and a model line, or `UNSAT`, to RESULT (or stdout) and
    /// exits with 10 or 20.
    Solve { cnf: PathBuf, result: Option<PathBuf> },
}

#[derive(clap::Args)]
struct SolverArgs {
    /// `internal` or an external solver command line.
    #[arg(long, env = SOLVER_ENV, default_value = "internal")]
    solver: String,
    /// Seconds before an external solver is killed.
    #[arg(long, env = TIMEOUT_ENV)]
    solver_timeout: Option<String>,
}

impl SolverArgs {
    fn backend(&self) -> Result<Backend> {
        let timeout = self.solver_timeout.as_deref().map(parse_timeout).transpose()?;
        Ok(Backend::from_choice(Some(&self.solver), timeout)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Uniform,
    Poisson,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bfs,
    Exhaustive,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("d3sync: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Minlen {
            nfa,
            l0,
            mode,
            variant,
            cap,
            emit_dimacs,
            solver,
        } => minlen(&nfa, l0, mode, variant, cap, emit_dimacs.as_deref(), &solver),
        Cmd::Gen {
            model,
            lambda,
            n,
            count,
            seed,
            out,
            filtered,
        } => {
            let kind = match (model, lambda) {
                (ModelArg::Uniform, None) => ModelKind::Uniform,
                (ModelArg::Uniform, Some(_)) => bail!("--lambda only applies to the poisson model"),
                (ModelArg::Poisson, Some(lambda)) => ModelKind::Poisson { lambda },
                (ModelArg::Poisson, None) => bail!("the poisson model needs --lambda"),
            };
            d3sync_core::random::ModelSpec::new(kind, n, seed)?;
            let (manifest, nfas) = generate_batch(kind, n, count, seed, filtered);
            write_batch(&out, &manifest, &nfas).with_context(|| format!("writing into {}", out.display()))?;
            print_json(&json!({
                "out": out.display().to_string(),
                "count": nfas.len(),
                "attempts": manifest.attempts,
                "passed": manifest.passed,
            }))?;
            Ok(EXIT_SYNC)
        }
        Cmd::Oracle { nfa, method, cap } => {
            let nfa = read_nfa(&nfa)?;
            let found = match method {
                Method::Bfs => shortest_d3_bfs(&nfa)?,
                Method::Exhaustive => shortest_d3_exhaustive(&nfa, cap)?,
            };
            let (v, code) = match (found, method) {
                (Some(w), _) => (json!({"length": w.length, "witness": w.witness.to_string()}), EXIT_SYNC),
                (None, Method::Bfs) => (json!({"synchronizing": false}), EXIT_NOT_UP_TO_CAP),
                (None, Method::Exhaustive) => (json!({"synchronizing": false, "cap": cap}), EXIT_NOT_UP_TO_CAP),
            };
            print_json(&v)?;
            Ok(code)
        }
        Cmd::Experiment { config, out } => {
            let cfg = ExperimentConfig::read(&config)?;
            let started = Instant::now();
            let campaign = run_campaign(&cfg)?;
            campaign.write(&out)?;
            let cells: Vec<Value> = campaign
                .summaries()
                .iter()
                .map(|c| json!({"n": c.n, "filtered": c.filtered, "mode": c.mode, "mean": c.mean, "errors": c.errors}))
                .collect();
            print_json(&json!({
                "out": out.display().to_string(),
                "records": campaign.records.len(),
                "cells": cells,
                "wall_time_s": started.elapsed().as_secs_f64(),
            }))?;
            Ok(EXIT_SYNC)
        }
        Cmd::Encode { nfa, length, variant } => {
            let nfa = read_nfa(&nfa)?;
            let enc = encoding::encode(&nfa, length, variant)?;
            let mut out = io::stdout().lock();
            dimacs::write_encoding(&mut out, &enc)?;
            Ok(EXIT_SYNC)
        }
        Cmd::Solve { cnf, result } => {
            let text = fs::read_to_string(&cnf).with_context(|| format!("reading {}", cnf.display()))?;
            let file = dimacs::parse_dimacs(&text)?;
            let res = solve_internal(&file.cnf)?;
            let mut buf = Vec::new();
            dimacs::write_solver_output(&mut buf, res.model.as_ref())?;
            match result {
                Some(path) => fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?,
                None => io::stdout().write_all(&buf)?,
            }
            Ok(match res.status {
                SolveStatus::Sat => 10,
                SolveStatus::Unsat => 20,
            })
        }
    }
}

fn minlen(
    path: &Path,
    l0: Option<usize>,
    mode: SearchMode,
    variant: Variant,
    cap: Option<usize>,
    emit: Option<&Path>,
    solver: &SolverArgs,
) -> Result<u8> {
    let nfa = read_nfa(path)?;
    let mut backend = solver.backend()?;
    let mut options = SearchOptions { l0, mode, variant, cap };
    let mut routed = false;
    if mode == SearchMode::Binary && nfa.everywhere_defined_symbol().is_none() {
        options.mode = SearchMode::Linear;
        routed = true;
    }
    if let Some(dir) = emit {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let write_error: RefCell<Option<io::Error>> = RefCell::new(None);
    let mut on_encoding = |enc: &encoding::Encoding| {
        let Some(dir) = emit else { return };
        let vm = &enc.varmap;
        let file = dir.join(format!("{}_len{}.cnf", vm.variant(), vm.length()));
        let written = fs::File::create(&file).and_then(|f| {
            let mut w = io::BufWriter::new(f);
            dimacs::write_encoding(&mut w, enc)?;
            w.flush()
        });
        if let Err(e) = written {
            write_error.borrow_mut().get_or_insert(e);
        }
    };
    let started = Instant::now();
    let result = search::find_min_length_with(&nfa, &options, &mut backend, &mut on_encoding);
    let wall = started.elapsed();
    if let Some(e) = write_error.into_inner() {
        return Err(e).context("writing DIMACS files");
    }
    let out = match result {
        Ok(out) => out,
        Err(SearchError::Solver { length, source, trace }) => {
            bail!("solver failed at length {length} after {} queries: {source}", trace.len())
        }
        Err(e) => return Err(e.into()),
    };
    let trace: Vec<Value> = out
        .trace
        .iter()
        .map(|e| {
            json!({
                "length": e.length,
                "status": if e.status == SolveStatus::Sat { "SAT" } else { "UNSAT" },
                "cached": e.cached,
            })
        })
        .collect();
    let mut report = json!({
        "file": path.display().to_string(),
        "states": nfa.states(),
        "variant": variant.to_string(),
        "mode": options.mode.to_string(),
        "l0": out.l0,
        "solver": backend.describe(),
        "trace": trace,
        "queries": out.queries,
        "stats": {
            "decisions": out.stats.decisions,
            "propagations": out.stats.propagations,
            "conflicts": out.stats.conflicts,
            "solver_time_s": out.stats.wall_time.unwrap_or(Duration::ZERO).as_secs_f64(),
        },
        "wall_time_s": wall.as_secs_f64(),
    });
    if routed {
        report["note"] = json!("no symbol is defined at every state; searched linearly");
    }
    let code = match &out.verdict {
        Verdict::MinimalLength { length, witness } => {
            report["synchronizing"] = json!(true);
            report["length"] = json!(length);
            report["witness"] = json!(witness.to_string());
            EXIT_SYNC
        }
        Verdict::NotSynchronizingUpTo { cap } => {
            report["synchronizing"] = json!(false);
            report["cap"] = json!(cap);
            EXIT_NOT_UP_TO_CAP
        }
    };
    print_json(&report)?;
    Ok(code)
}
