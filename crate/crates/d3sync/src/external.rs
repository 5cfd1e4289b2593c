//! Running a DIMACS solver as a child process.
//!
//! The solver is invoked as `<command…> <input.cnf> <result.txt>`. The
//! result file is read when the solver wrote one, otherwise its standard
//! output. Any SAT claim is checked against the formula before it is
//! returned.

use std::fs;
use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use d3sync_core::cnf::Cnf;
use d3sync_core::solver::{verify_model, SatBackend, SolveError, SolveResult, SolveStats, SolveStatus};
use wait_timeout::ChildExt;

use crate::dimacs::{self, SolverAnswer};

pub const SOLVER_ENV: &str = "D3SYNC_SOLVER";
pub const TIMEOUT_ENV: &str = "D3SYNC_SOLVER_TIMEOUT_S";

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Option<Duration>,
}

impl ExternalSolver {
    /// Splits `command` on whitespace into program and leading arguments.
    pub fn from_command(command: &str, timeout: Option<Duration>) -> Result<Self, SolveError> {
        let mut parts = command.split_whitespace().map(str::to_owned);
        let program = parts
            .next()
            .ok_or_else(|| SolveError::Backend("empty solver command".into()))?;
        Ok(ExternalSolver {
            program,
            args: parts.collect(),
            timeout,
        })
    }

    /// From `D3SYNC_SOLVER` and `D3SYNC_SOLVER_TIMEOUT_S`; `None` when the
    /// command variable is unset or empty.
    pub fn from_env() -> Result<Option<Self>, SolveError> {
        let Some(cmd) = std::env::var(SOLVER_ENV).ok().filter(|c| !c.trim().is_empty()) else {
            return Ok(None);
        };
        let timeout = match std::env::var(TIMEOUT_ENV) {
            Ok(v) => Some(parse_timeout(&v)?),
            Err(_) => None,
        };
        Self::from_command(&cmd, timeout).map(Some)
    }
}

pub fn parse_timeout(v: &str) -> Result<Duration, SolveError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s > 0.0)
        .map(Duration::from_secs_f64)
        .ok_or_else(|| SolveError::Backend(format!("bad solver timeout {v:?}")))
}

fn backend_err(what: &str, e: impl std::fmt::Display) -> SolveError {
    SolveError::Backend(format!("{what}: {e}"))
}

impl SatBackend for ExternalSolver {
    fn solve(&mut self, cnf: &Cnf) -> Result<SolveResult, SolveError> {
        let dir = tempfile::tempdir().map_err(|e| backend_err("temporary directory", e))?;
        let input = dir.path().join("input.cnf");
        let output = dir.path().join("result.txt");
        let mut text = Vec::new();
        dimacs::write_cnf(&mut text, cnf).map_err(|e| backend_err("writing formula", e))?;
        fs::write(&input, text).map_err(|e| backend_err("writing formula", e))?;

        let started = Instant::now();
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(&input)
            .arg(&output)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| backend_err(&format!("cannot start {}", self.program), e))?;
        // drain stdout on a thread so a chatty solver cannot block on a full pipe
        let mut stdout = child.stdout.take().expect("piped");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout.read_to_string(&mut buf);
            buf
        });
        let status = match self.timeout {
            Some(limit) => match child.wait_timeout(limit).map_err(|e| backend_err("waiting for solver", e))? {
                Some(s) => s,
                None => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolveError::Backend(format!(
                        "{} exceeded the {:.1} s timeout",
                        self.program,
                        limit.as_secs_f64()
                    )));
                }
            },
            None => child.wait().map_err(|e| backend_err("waiting for solver", e))?,
        };
        let elapsed = started.elapsed();
        let stdout = reader.join().unwrap_or_default();

        let result_text = fs::read_to_string(&output).ok().filter(|t| !t.trim().is_empty()).unwrap_or(stdout);
        let answer = dimacs::parse_solver_output(&result_text).map_err(|e| {
            let code = status.code().map_or("signal".to_string(), |c| c.to_string());
            backend_err(&format!("unparseable output from {} (exit {code})", self.program), e)
        })?;
        let stats = SolveStats {
            wall_time: Some(elapsed),
            ..SolveStats::default()
        };
        match answer {
            SolverAnswer::Unsat => Ok(SolveResult {
                status: SolveStatus::Unsat,
                model: None,
                stats,
            }),
            SolverAnswer::Sat(_) => {
                let model = answer.model(cnf.num_vars()).expect("sat answer");
                verify_model(cnf, &model)?;
                Ok(SolveResult {
                    status: SolveStatus::Sat,
                    model: Some(model),
                    stats,
                })
            }
            SolverAnswer::Unknown => Err(SolveError::Backend(format!("{} reported an unknown result", self.program))),
        }
    }
}
