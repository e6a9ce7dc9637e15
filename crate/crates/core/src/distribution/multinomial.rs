use std::collections::BTreeMap;

use super::{rate_term, solver, SolverReport};
use crate::combinatorics::{CountVector, LnFactorialTable};
use crate::deformed::Deformation;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::simplex::ProbabilityVector;

/// Upper limit on the number of compositions [`q_multinomial_pmf_small`] enumerates.
pub const MAX_COMPOSITIONS: u128 = 1_000_000;

/// `ln_q m_q - C_q` for one composition.
pub fn q_multinomial_ln_pmf_unnormalized(
    q: Deformation,
    counts: &CountVector,
    rates: &ProbabilityVector,
) -> Result<f64> {
    let table = LnFactorialTable::new(q, counts.total());
    ln_mass(q, &table, counts.counts(), rates)
}

fn ln_mass(q: Deformation, table: &LnFactorialTable, counts: &[u64], rates: &[f64]) -> Result<f64> {
    if counts.len() != rates.len() {
        return Err(Error::invalid(
            "rates",
            format!("{} rates for {} blocks", rates.len(), counts.len()),
        ));
    }
    let terms = counts
        .iter()
        .zip(rates)
        .map(|(&c, &r)| rate_term(q, c, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(table.ln_multinomial(counts) + compensated_sum(terms))
}

/// `C(n + k - 1, k - 1)`, saturating.
pub fn composition_count(n: u64, k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 1..k as u128 {
        acc = acc.saturating_mul(n as u128 + i) / i;
    }
    acc
}

fn compositions(n: u64, k: usize) -> Vec<Vec<u64>> {
    fn go(remaining: u64, slots: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            go(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// A q-multinomial law materialized over every composition of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMultinomialPmf {
    pub q: Deformation,
    pub n: u64,
    pub rates: ProbabilityVector,
    pub compositions: Vec<Vec<u64>>,
    pub probabilities: Vec<f64>,
    pub c_q: f64,
    pub report: SolverReport,
}

impl QMultinomialPmf {
    pub fn to_map(&self) -> BTreeMap<Vec<u64>, f64> {
        self.compositions
            .iter()
            .cloned()
            .zip(self.probabilities.iter().copied())
            .collect()
    }
}

/// Enumerates all compositions of `n` over `rates.len()` blocks and
/// normalizes them with a shared `C_q`.
pub fn q_multinomial_pmf_small(q: Deformation, n: u64, rates: &ProbabilityVector) -> Result<QMultinomialPmf> {
    if q.value() <= 0.0 || q.value() >= 2.0 {
        return Err(Error::invalid("q", format!("{q} is outside (0, 2)")));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let count = composition_count(n, rates.len());
    if count > MAX_COMPOSITIONS {
        return Err(Error::TooManyCompositions {
            count,
            limit: MAX_COMPOSITIONS,
        });
    }
    let table = LnFactorialTable::new(q, n);
    let comps = compositions(n, rates.len());
    let s = comps
        .iter()
        .map(|c| ln_mass(q, &table, c, rates))
        .collect::<Result<Vec<_>>>()?;
    let (c_q, report) = solver::solve(q, &s)?;
    let probabilities = solver::ln_masses(q, &s, c_q).into_iter().map(f64::exp).collect();
    Ok(QMultinomialPmf {
        q,
        n,
        rates: rates.clone(),
        compositions: comps,
        probabilities,
        c_q,
        report,
    })
}
