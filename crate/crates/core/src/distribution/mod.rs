//! The q-binomial law.
//!
//! Its q-logarithm is prescribed term by term,
//!
//! ```text
//! ln_q b_q(k; n, r) = ln_q [n k]_q
//!                   + (k^(2-q) ln_{2-q} r + (n-k)^(2-q) ln_{2-q}(1-r)) / (2-q)
//!                   + C_q
//! ```
//!
//! with the exact q-binomial coefficient and `C_q` fixed by normalization.
//! For `q < 1`, outcomes whose q-log mass falls below `-1/(1-q)` get
//! probability zero (cutoff convention).

mod multinomial;
pub mod record;
pub mod solver;

pub use multinomial::{
    composition_count, q_multinomial_ln_pmf_unnormalized, q_multinomial_pmf_small, QMultinomialPmf,
    MAX_COMPOSITIONS,
};
pub use solver::SolverReport;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::LnFactorialTable;
use crate::deformed::Deformation;
use crate::error::{DomainViolation, Error, Result};
use crate::numeric::{log_sum_exp, pow_zero, CompensatedSum};

/// Parameters `(q, n, r)` of a q-binomial law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBinomialSpec {
    q: Deformation,
    n: u64,
    r: f64,
}

impl QBinomialSpec {
    pub fn new(q: f64, n: u64, r: f64) -> Result<Self> {
        let q = Deformation::in_window(q)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid("r", format!("{r} is outside (0, 1)")));
        }
        Ok(Self { q, n, r })
    }

    pub fn q(&self) -> Deformation {
        self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The same law with success and failure swapped.
    pub fn mirrored(&self) -> Self {
        Self {
            r: 1.0 - self.r,
            ..*self
        }
    }
}

/// `(k^(2-q) ln_{2-q} r + (n-k)^(2-q) ln_{2-q}(1-r)) / (2-q)` style term for
/// one block: `n_i^(2-q) ln_{2-q} r_i / (2-q)`.
pub(crate) fn rate_term(q: Deformation, count: u64, rate: f64) -> Result<f64> {
    if count == 0 {
        return Ok(0.0);
    }
    let dual = q.dual();
    let a = dual.value();
    Ok(pow_zero(count as f64, a) * dual.ln(rate)? / a)
}

fn q_log_mass(spec: &QBinomialSpec, table: &LnFactorialTable, k: u64) -> f64 {
    let (q, n, r) = (spec.q, spec.n, spec.r);
    table.ln_multinomial(&[k, n - k])
        + rate_term(q, k, r).expect("0 < r < 1")
        + rate_term(q, n - k, 1.0 - r).expect("0 < r < 1")
}

/// Unnormalized q-log mass `s_k = ln_q b_q(k; n, r) - C_q`.
pub fn ln_q_pmf_unnormalized(spec: &QBinomialSpec, k: u64) -> Result<f64> {
    if k > spec.n {
        return Err(Error::invalid("k", format!("{k} exceeds n = {}", spec.n)));
    }
    let table = LnFactorialTable::new(spec.q, spec.n);
    Ok(q_log_mass(spec, &table, k))
}

/// Solves for `C_q`.
pub fn solve_normalization(spec: &QBinomialSpec) -> Result<f64> {
    Ok(QBinomialPmf::build(spec)?.c_q)
}

/// A fully materialized q-binomial pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct QBinomialPmf {
    pub spec: QBinomialSpec,
    /// `b_q(k; n, r)` for `k = 0..=n`.
    pub probabilities: Vec<f64>,
    /// `ln b_q(k; n, r)`, kept separately since deep tails underflow.
    pub ln_probabilities: Vec<f64>,
    /// `s_k`, the q-log masses before the constant is added.
    pub q_log_masses: Vec<f64>,
    pub c_q: f64,
    pub report: SolverReport,
}

impl QBinomialPmf {
    pub fn build(spec: &QBinomialSpec) -> Result<Self> {
        let table = LnFactorialTable::new(spec.q, spec.n);
        Self::build_with_table(spec, &table)
    }

    /// Builds from a shared factorial table, which must cover `n` for the same `q`.
    pub fn build_with_table(spec: &QBinomialSpec, table: &LnFactorialTable) -> Result<Self> {
        Self::build_inner(spec, table, None)
    }

    /// Builds with a caller-chosen starting bracket for the normalization solve.
    pub fn build_with_bracket(spec: &QBinomialSpec, bracket: (f64, f64)) -> Result<Self> {
        let table = LnFactorialTable::new(spec.q, spec.n);
        Self::build_inner(spec, &table, Some(bracket))
    }

    fn build_inner(
        spec: &QBinomialSpec,
        table: &LnFactorialTable,
        bracket: Option<(f64, f64)>,
    ) -> Result<Self> {
        assert!(table.n_max() >= spec.n && table.q() == spec.q, "factorial table mismatch");
        let s: Vec<f64> = (0..=spec.n).map(|k| q_log_mass(spec, table, k)).collect();
        let (c_q, report) = solver::solve_with_bracket(spec.q, &s, bracket)?;
        let ln_probabilities = solver::ln_masses(spec.q, &s, c_q);
        let probabilities = ln_probabilities.iter().map(|v| v.exp()).collect();
        Ok(Self {
            spec: *spec,
            probabilities,
            ln_probabilities,
            q_log_masses: s,
            c_q,
            report,
        })
    }

    pub fn n(&self) -> u64 {
        self.spec.n
    }

    /// `⌊n x⌋`, the last outcome counted by [`QBinomialPmf::cdf_below`].
    pub fn floor_index(&self, x: f64) -> u64 {
        ((self.spec.n as f64 * x).floor() as u64).min(self.spec.n)
    }

    fn check_x(x: f64) -> Result<()> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::invalid("x", format!("{x} is outside (0, 1)")));
        }
        Ok(())
    }

    /// `Σ_{k=0}^{⌊nx⌋} b_q(k)`, the probability that the sample mean is below `x`.
    ///
    /// The sum runs up to `⌊nx⌋` inclusive even when `nx` is an integer.
    pub fn cdf_below(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let last = self.floor_index(x) as usize;
        let mut acc = CompensatedSum::new();
        for &p in &self.probabilities[..=last] {
            acc.add(p);
        }
        Ok(acc.value())
    }

    /// Natural log of [`QBinomialPmf::cdf_below`], accurate when the tail underflows.
    pub fn ln_cdf_below(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let last = self.floor_index(x) as usize;
        Ok(log_sum_exp(&self.ln_probabilities[..=last]))
    }

    /// `ln_q b_q(k)`, failing where the cutoff assigned zero mass.
    pub fn q_ln_probability(&self, k: u64) -> Result<f64> {
        let lp = *self
            .ln_probabilities
            .get(k as usize)
            .ok_or_else(|| Error::invalid("k", format!("{k} exceeds n = {}", self.spec.n)))?;
        if lp == f64::NEG_INFINITY {
            return Err(DomainViolation::new("q_ln", 0.0, "x > 0 (outcome is cut off)").into());
        }
        Ok(self.spec.q.ln_from_log(lp))
    }

    /// `m` inverse-CDF draws from a ChaCha stream seeded with `seed`.
    pub fn sample(&self, seed: u64, m: usize) -> Vec<u64> {
        sample_indices(&self.probabilities, seed, m)
    }
}

/// Inverse-CDF sampling of indices from non-negative weights.
pub fn sample_indices(probabilities: &[f64], seed: u64, m: usize) -> Vec<u64> {
    let mut acc = CompensatedSum::new();
    let cdf: Vec<f64> = probabilities
        .iter()
        .map(|&p| {
            acc.add(p);
            acc.value()
        })
        .collect();
    let total = acc.value();
    let last_live = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u);
            idx.min(last_live) as u64
        })
        .collect()
}
