//! Backend selection and wall-clock timing.

use std::time::{Duration, Instant};

use d3sync_core::cnf::Cnf;
use d3sync_core::solver::{InternalSolver, SatBackend, SolveError, SolveResult};

use crate::external::ExternalSolver;

#[derive(Debug, Clone)]
pub enum Backend {
    Internal(InternalSolver),
    External(ExternalSolver),
}

impl Backend {
    /// `"internal"` (or empty) selects the built-in solver; anything else is
    /// an external command line.
    pub fn from_choice(choice: Option<&str>, timeout: Option<Duration>) -> Result<Backend, SolveError> {
        match choice.map(str::trim) {
            None | Some("") | Some("internal") => Ok(Backend::Internal(InternalSolver::default())),
            Some(cmd) => ExternalSolver::from_command(cmd, timeout).map(Backend::External),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Backend::Internal(_) => "internal".into(),
            Backend::External(e) => std::iter::once(e.program.as_str())
                .chain(e.args.iter().map(String::as_str))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

impl SatBackend for Backend {
    fn solve(&mut self, cnf: &Cnf) -> Result<SolveResult, SolveError> {
        let started = Instant::now();
        let mut res = match self {
            Backend::Internal(s) => s.solve(cnf),
            Backend::External(s) => s.solve(cnf),
        }?;
        res.stats.wall_time.get_or_insert_with(|| started.elapsed());
        Ok(res)
    }
}
