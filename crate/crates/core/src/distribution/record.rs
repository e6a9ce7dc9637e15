//! Line-oriented text record of a materialized q-binomial pmf.
//!
//! ```text
//! # qbinomial-pmf v1
//! q,n,r,c_q
//! <q>,<n>,<r>,<c_q>
//! k,probability
//! 0,<b_0>
//! ...
//! n,<b_n>
//! ```
//!
//! Reals are written with 17 significant digits so they parse back exactly.

use std::fmt::Write as _;

use super::{QBinomialPmf, QBinomialSpec};
use crate::error::{Error, Result};
use crate::numeric::format_f64;

pub const HEADER: &str = "# qbinomial-pmf v1";

/// The fields a record carries.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfRecord {
    pub spec: QBinomialSpec,
    pub c_q: f64,
    pub probabilities: Vec<f64>,
}

impl From<&QBinomialPmf> for PmfRecord {
    fn from(pmf: &QBinomialPmf) -> Self {
        Self {
            spec: pmf.spec,
            c_q: pmf.c_q,
            probabilities: pmf.probabilities.clone(),
        }
    }
}

pub fn write_record(pmf: &QBinomialPmf) -> String {
    let mut out = String::new();
    let spec = pmf.spec;
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "q,n,r,c_q").unwrap();
    writeln!(
        out,
        "{},{},{},{}",
        format_f64(spec.q().value()),
        spec.n(),
        format_f64(spec.r()),
        format_f64(pmf.c_q)
    )
    .unwrap();
    writeln!(out, "k,probability").unwrap();
    for (k, p) in pmf.probabilities.iter().enumerate() {
        writeln!(out, "{k},{}", format_f64(*p)).unwrap();
    }
    out
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::Record {
        line,
        reason: reason.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| bad(line, format!("`{s}`: {e}")))
}

pub fn parse_record(text: &str) -> Result<PmfRecord> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, format!("missing {what}")));

    let (ln, header) = next("header")?;
    if header.trim() != HEADER {
        return Err(bad(ln, format!("expected `{HEADER}`")));
    }
    let (ln, cols) = next("parameter header")?;
    if cols.trim() != "q,n,r,c_q" {
        return Err(bad(ln, "expected `q,n,r,c_q`"));
    }
    let (ln, params) = next("parameters")?;
    let fields: Vec<&str> = params.split(',').collect();
    if fields.len() != 4 {
        return Err(bad(ln, "expected four parameter fields"));
    }
    let q = parse_f64(fields[0], ln)?;
    let n: u64 = fields[1]
        .trim()
        .parse()
        .map_err(|e| bad(ln, format!("n: {e}")))?;
    let r = parse_f64(fields[2], ln)?;
    let c_q = parse_f64(fields[3], ln)?;
    let spec = QBinomialSpec::new(q, n, r).map_err(|e| bad(ln, e.to_string()))?;

    let (ln, cols) = next("probability header")?;
    if cols.trim() != "k,probability" {
        return Err(bad(ln, "expected `k,probability`"));
    }
    let mut probabilities = Vec::with_capacity(n as usize + 1);
    for (ln, row) in lines {
        if row.trim().is_empty() {
            continue;
        }
        let (k, p) = row.split_once(',').ok_or_else(|| bad(ln, "expected `k,probability`"))?;
        let k: usize = k.trim().parse().map_err(|e| bad(ln, format!("k: {e}")))?;
        if k != probabilities.len() {
            return Err(bad(ln, format!("k = {k} out of order")));
        }
        probabilities.push(parse_f64(p, ln)?);
    }
    if probabilities.len() as u64 != n + 1 {
        return Err(bad(0, format!("expected {} rows, found {}", n + 1, probabilities.len())));
    }
    Ok(PmfRecord {
        spec,
        c_q,
        probabilities,
    })
}
