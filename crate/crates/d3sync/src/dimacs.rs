//! DIMACS CNF reading and writing, and parsing of solver result files.
//!
//! Encodings are written with a block of `c` comments describing the
//! variable layout, so a model can be turned back into a word from the
//! formula file and the solver output alone:
//!
//! ```text
//! c d3sync encoding
//! c states 3
//! c length 2
//! c variant basic
//! c swapped 0
//! c letters 1 2
//! c tokens 3 27
//! c sync 30 3
//! p cnf 32 …
//! ```
//!
//! The two numbers on the block lines are the first variable and the count.

use std::fmt::Write as _;
use std::io::{self, Write};

use d3sync_core::cnf::{Clause, Cnf, CnfError, Lit, Model};
use d3sync_core::encoding::{Encoding, VarMap, Variant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p cnf` header")]
    NoHeader,
    #[error("header announces {expected} clauses, found {found}")]
    ClauseCount { expected: usize, found: usize },
    #[error("clause not terminated by 0 at end of input")]
    Unterminated,
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error("layout comments: {0}")]
    Layout(String),
}

fn layout_comments(vm: &VarMap) -> String {
    let mut s = String::new();
    let n = vm.states();
    let _ = writeln!(s, "c d3sync encoding");
    let _ = writeln!(s, "c states {n}");
    let _ = writeln!(s, "c length {}", vm.length());
    let _ = writeln!(s, "c variant {}", vm.variant());
    let _ = writeln!(s, "c swapped {}", u8::from(vm.swapped()));
    let _ = writeln!(s, "c letters 1 {}", vm.letter_count());
    let _ = writeln!(s, "c tokens {} {}", vm.token_offset() + 1, vm.layer_count() * n * n);
    let _ = writeln!(s, "c sync {} {}", vm.sync_offset() + 1, n);
    s
}

pub fn write_cnf<W: Write>(out: &mut W, cnf: &Cnf) -> io::Result<()> {
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.len())?;
    let mut line = String::new();
    for clause in cnf.clauses() {
        line.clear();
        for l in clause.lits() {
            let _ = write!(line, "{} ", l.to_dimacs());
        }
        line.push('0');
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_encoding<W: Write>(out: &mut W, enc: &Encoding) -> io::Result<()> {
    out.write_all(layout_comments(&enc.varmap).as_bytes())?;
    write_cnf(out, &enc.cnf)
}

pub fn encoding_to_string(enc: &Encoding) -> String {
    let mut buf = Vec::new();
    write_encoding(&mut buf, enc).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

/// A parsed file: the formula plus its layout when the comments carry one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsFile {
    pub cnf: Cnf,
    pub varmap: Option<VarMap>,
}

pub fn parse_dimacs(text: &str) -> Result<DimacsFile, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut comments: Vec<&str> = Vec::new();
    let mut cnf = Cnf::new(0);
    let mut pending: Vec<Lit> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                comments.push(rest.trim());
                continue;
            }
        }
        if line == "%" {
            // end marker used by some benchmark files
            break;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            if header.is_some() {
                return Err(DimacsError::Syntax {
                    line: line_no,
                    msg: "second header".into(),
                });
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let bad = || DimacsError::Syntax {
                line: line_no,
                msg: format!("bad header {line:?}"),
            };
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(bad());
            }
            let vars = parts[1].parse().map_err(|_| bad())?;
            let clauses = parts[2].parse().map_err(|_| bad())?;
            header = Some((vars, clauses));
            cnf = Cnf::new(vars);
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::NoHeader);
        }
        for tok in line.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| DimacsError::Syntax {
                line: line_no,
                msg: format!("not a literal: {tok:?}"),
            })?;
            match Lit::from_dimacs(v) {
                Some(l) => pending.push(l),
                None => {
                    if pending.is_empty() {
                        return Err(DimacsError::Syntax {
                            line: line_no,
                            msg: "empty clause".into(),
                        });
                    }
                    cnf.push(Clause::new(std::mem::take(&mut pending)))?;
                }
            }
        }
    }
    let (_, expected) = header.ok_or(DimacsError::NoHeader)?;
    if !pending.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if cnf.len() != expected {
        return Err(DimacsError::ClauseCount {
            expected,
            found: cnf.len(),
        });
    }
    let varmap = layout_from_comments(&comments)?;
    if let Some(vm) = &varmap {
        if vm.num_vars() != cnf.num_vars() {
            return Err(DimacsError::Layout(format!(
                "layout needs {} variables, header declares {}",
                vm.num_vars(),
                cnf.num_vars()
            )));
        }
    }
    Ok(DimacsFile { cnf, varmap })
}

fn layout_from_comments(comments: &[&str]) -> Result<Option<VarMap>, DimacsError> {
    if !comments.contains(&"d3sync encoding") {
        return Ok(None);
    }
    let field = |key: &str| -> Result<&str, DimacsError> {
        comments
            .iter()
            .find_map(|c| c.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
            .map(str::trim)
            .ok_or_else(|| DimacsError::Layout(format!("missing `c {key}` line")))
    };
    let number = |key: &str| -> Result<usize, DimacsError> {
        let v = field(key)?;
        v.parse().map_err(|_| DimacsError::Layout(format!("bad `c {key}` value {v:?}")))
    };
    let variant: Variant = field("variant")?
        .parse()
        .map_err(|e: d3sync_core::encoding::ParseVariantError| DimacsError::Layout(e.0))?;
    let swapped = match field("swapped")? {
        "0" => false,
        "1" => true,
        other => return Err(DimacsError::Layout(format!("bad `c swapped` value {other:?}"))),
    };
    let vm = VarMap::new(variant, number("states")?, number("length")?, swapped)
        .map_err(|e| DimacsError::Layout(e.to_string()))?;
    let expected = layout_comments(&vm);
    for line in expected.lines() {
        let body = line.trim_start_matches('c').trim();
        if !comments.contains(&body) {
            return Err(DimacsError::Layout(format!("expected `{line}`")));
        }
    }
    Ok(Some(vm))
}

/// What an external solver reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverAnswer {
    /// Satisfiable with the listed literals; unlisted variables are free.
    Sat(Vec<Lit>),
    Unsat,
    Unknown,
}

impl SolverAnswer {
    pub fn model(&self, num_vars: u32) -> Option<Model> {
        match self {
            SolverAnswer::Sat(lits) => Some(Model::from_lits(num_vars, lits.iter().copied())),
            _ => None,
        }
    }
}

/// Parses either a MiniSat result file (`SAT` then a literal line, or
/// `UNSAT`) or competition-style output (`s SATISFIABLE` with `v` lines).
/// Other lines are ignored.
pub fn parse_solver_output(text: &str) -> Result<SolverAnswer, DimacsError> {
    let mut status: Option<SolverAnswer> = None;
    let mut lits = Vec::new();
    let mut terminated = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let body = match line.split_once(char::is_whitespace) {
            Some(("s", rest)) => {
                status = Some(match rest.trim() {
                    "SATISFIABLE" => SolverAnswer::Sat(Vec::new()),
                    "UNSATISFIABLE" => SolverAnswer::Unsat,
                    _ => SolverAnswer::Unknown,
                });
                continue;
            }
            Some(("v", rest)) => rest,
            _ => match line {
                "SAT" | "SATISFIABLE" => {
                    status = Some(SolverAnswer::Sat(Vec::new()));
                    continue;
                }
                "UNSAT" | "UNSATISFIABLE" => {
                    status = Some(SolverAnswer::Unsat);
                    continue;
                }
                "INDET" | "UNKNOWN" | "s UNKNOWN" => {
                    status = Some(SolverAnswer::Unknown);
                    continue;
                }
                _ if matches!(status, Some(SolverAnswer::Sat(_)))
                    && line.starts_with(|c: char| c == '-' || c.is_ascii_digit()) =>
                {
                    line
                }
                _ => continue,
            },
        };
        for tok in body.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| DimacsError::Syntax {
                line: idx + 1,
                msg: format!("not a literal: {tok:?}"),
            })?;
            match Lit::from_dimacs(v) {
                Some(l) => lits.push(l),
                None => terminated = true,
            }
        }
    }
    match status {
        Some(SolverAnswer::Sat(_)) => {
            if !terminated && !lits.is_empty() {
                return Err(DimacsError::Unterminated);
            }
            Ok(SolverAnswer::Sat(lits))
        }
        Some(other) => Ok(other),
        None => Err(DimacsError::Syntax {
            line: 0,
            msg: "no SAT/UNSAT verdict in solver output".into(),
        }),
    }
}

/// Writes a MiniSat-style result file.
pub fn write_solver_output<W: Write>(out: &mut W, model: Option<&Model>) -> io::Result<()> {
    match model {
        None => writeln!(out, "UNSAT"),
        Some(m) => {
            writeln!(out, "SAT")?;
            let mut line = String::new();
            for l in m.to_lits() {
                let _ = write!(line, "{} ", l.to_dimacs());
            }
            line.push('0');
            writeln!(out, "{line}")
        }
    }
}
