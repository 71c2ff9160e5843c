//! DIMACS CNF reading and writing.
//!
//! Variables are 1-indexed on disk and 0-indexed in memory. Clauses are kept
//! exactly as written: repeated and complementary literals survive a round
//! trip. The writer emits a `c k=<width>` comment so that the clause width of
//! an empty formula is preserved; the reader honours it when present.

use crate::cnf::{Formula, Literal};
use crate::error::{Error, Result};

/// How strictly clause widths are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WidthPolicy {
    /// Every clause must have the same width (the declared `k`, or the first
    /// clause's width when none is declared).
    #[default]
    Strict,
    /// Mixed widths are accepted with a warning.
    Tolerant,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReadOptions {
    pub width: WidthPolicy,
    /// Expected clause width. Overrides a `c k=` comment.
    pub k: Option<usize>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Dimacs {
        line,
        msg: msg.into(),
    }
}

/// Parses DIMACS text with strict width checking.
pub fn read_dimacs(text: &str) -> Result<Formula> {
    read_dimacs_with(text, ReadOptions::default())
}

pub fn read_dimacs_with(text: &str, opts: ReadOptions) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut declared_k: Option<usize> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if let Some(v) = rest.trim().strip_prefix("k=") {
                declared_k = v.trim().parse().ok();
            }
            continue;
        }
        if line.starts_with('%') {
            // SATLIB files end with a `%` trailer.
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate problem line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(line_no, format!("malformed header {line:?}")));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| err(line_no, format!("bad variable count {:?}", parts[2])))?;
            let m = parts[3]
                .parse()
                .map_err(|_| err(line_no, format!("bad clause count {:?}", parts[3])))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| err(line_no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
            match Literal::from_dimacs(v) {
                None => clauses.push(std::mem::take(&mut current)),
                Some(l) => {
                    if l.var() >= n {
                        return Err(err(
                            line_no,
                            format!("variable {} exceeds declared count {n}", l.var() + 1),
                        ));
                    }
                    current.push(l);
                }
            }
        }
    }

    let (n, m) = header.ok_or_else(|| err(last_line, "missing problem line"))?;
    if !current.is_empty() {
        match opts.width {
            WidthPolicy::Strict => {
                return Err(err(last_line, "last clause is not zero-terminated"))
            }
            WidthPolicy::Tolerant => {
                log::warn!("last clause is not zero-terminated; accepting it");
                clauses.push(current);
            }
        }
    }
    if clauses.len() != m {
        match opts.width {
            WidthPolicy::Strict => {
                return Err(err(
                    last_line,
                    format!("header declares {m} clauses, found {}", clauses.len()),
                ))
            }
            WidthPolicy::Tolerant => {
                log::warn!("header declares {m} clauses, found {}", clauses.len())
            }
        }
    }

    let k = opts
        .k
        .or(declared_k)
        .or_else(|| clauses.first().map(Vec::len))
        .unwrap_or(0);
    match opts.width {
        WidthPolicy::Strict => Formula::from_clauses(n, k, &clauses),
        WidthPolicy::Tolerant => {
            if clauses.iter().any(|c| c.len() != k) {
                log::warn!("formula has mixed clause widths");
            }
            let mut f = Formula::from_clauses_tolerant(n, &clauses)?;
            if f.is_empty() {
                f = Formula::new(n, k);
            }
            Ok(f)
        }
    }
}

/// Serialises a formula. Output is byte-stable for a given formula.
pub fn write_dimacs(f: &Formula) -> String {
    use std::fmt::Write;
    let mut out = String::with_capacity(16 + f.num_clauses() * (f.k() * 4 + 2));
    let _ = writeln!(out, "c k={}", f.k());
    let _ = writeln!(out, "p cnf {} {}", f.n(), f.num_clauses());
    for c in f.clauses() {
        for l in c {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
