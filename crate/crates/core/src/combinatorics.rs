//! q-factorials, q-Stirling formulas, q-multinomial coefficients and
//! Tsallis entropy.
//!
//! The exact `ln_q(n!_q)` is the plain sum `Σ_{k≤n} ln_q k` (the q-product
//! turns into addition under `ln_q`). It is computed by compensated
//! summation and serves as the ground truth for every asymptotic formula
//! in this module.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::deformed::{Deformation, CLASSICAL_WINDOW};
use crate::error::{DomainViolation, Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::simplex::ProbabilityVector;

/// Block sizes `n_1..n_k` of a multinomial coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("counts", "at least one block is required"));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::invalid("counts", "total overflows"))?;
        if total == 0 {
            return Err(Error::invalid("counts", "total must be at least 1"));
        }
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Empirical proportions `n_i / n`.
    pub fn proportions(&self) -> ProbabilityVector {
        let n = self.total as f64;
        ProbabilityVector::normalized(self.counts.iter().map(|&c| c as f64 / n).collect())
            .expect("counts have positive total")
    }
}

/// Prefix table of `ln_q(k!_q)` for `k = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct LnFactorialTable {
    q: Deformation,
    prefix: Vec<f64>,
}

impl LnFactorialTable {
    pub fn new(q: Deformation, n_max: u64) -> Self {
        let len = usize::try_from(n_max).expect("n_max fits in memory") + 1;
        let mut prefix = vec![0.0; len];
        let mut acc = CompensatedSum::new();
        // ln_q 1 = 0, so the sum starts at k = 2
        for (k, slot) in prefix.iter_mut().enumerate().skip(2) {
            acc.add(q.ln(k as f64).expect("k >= 1"));
            *slot = acc.value();
        }
        Self { q, prefix }
    }

    pub fn q(&self) -> Deformation {
        self.q
    }

    pub fn n_max(&self) -> u64 {
        (self.prefix.len() - 1) as u64
    }

    /// `ln_q(n!_q)`, with `0!_q = 1!_q = 1`.
    ///
    /// # Panics
    ///
    /// If `n` exceeds the table size.
    pub fn ln_factorial(&self, n: u64) -> f64 {
        self.prefix[n as usize]
    }

    /// `ln_q` of the q-multinomial coefficient of `counts`.
    pub fn ln_multinomial(&self, counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        self.ln_factorial(n) - compensated_sum(counts.iter().map(|&c| self.ln_factorial(c)))
    }
}

/// Shared per-q cache of factorial tables. Readers run concurrently;
/// growing a table takes the write lock.
#[derive(Debug, Default)]
pub struct LnFactorialCache {
    tables: RwLock<HashMap<u64, Arc<LnFactorialTable>>>,
}

impl LnFactorialCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// A table for `q` covering at least `n`.
    pub fn table(&self, q: Deformation, n: u64) -> Arc<LnFactorialTable> {
        let key = q.value().to_bits();
        if let Some(t) = self.tables.read().unwrap().get(&key) {
            if t.n_max() >= n {
                return Arc::clone(t);
            }
        }
        let mut guard = self.tables.write().unwrap();
        match guard.get(&key) {
            Some(t) if t.n_max() >= n => Arc::clone(t),
            _ => {
                let t = Arc::new(LnFactorialTable::new(q, n));
                guard.insert(key, Arc::clone(&t));
                t
            }
        }
    }
}

/// Exact `ln_q(n!_q) = Σ_{k=1..n} ln_q k`.
pub fn q_ln_factorial(q: Deformation, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    Ok(compensated_sum((2..=n).map(|k| q.ln(k as f64).expect("k >= 1"))))
}

fn is_two(q: Deformation) -> bool {
    (q.value() - 2.0).abs() < CLASSICAL_WINDOW
}

/// Leading term of the rough q-Stirling formula.
pub fn q_stirling_rough(q: Deformation, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    if q.value() <= 0.0 {
        return Err(DomainViolation::new("q_stirling_rough", q.value(), "q > 0").into());
    }
    let nf = n as f64;
    if is_two(q) {
        Ok(nf - nf.ln())
    } else {
        Ok((nf * q.ln(nf)? - nf) / (2.0 - q.value()))
    }
}

/// The constants `δ_q` and `c_q = 1/(2-q) - δ_q` of the precise q-Stirling formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingConstants {
    pub q: Deformation,
    pub delta_q: f64,
}

impl StirlingConstants {
    pub fn new(q: Deformation, delta_q: f64) -> Self {
        Self { q, delta_q }
    }

    /// `q = 1`, where `δ_1 = 1 - ln √(2π)`.
    pub fn classical() -> Self {
        Self::new(Deformation::CLASSICAL, 1.0 - (2.0 * std::f64::consts::PI).sqrt().ln())
    }

    /// Constants with `δ_q` fitted by [`estimate_delta_q`] at `n_max = 10^6`.
    /// Results are memoized per `q`.
    pub fn fitted(q: Deformation) -> Result<Self> {
        Ok(Self::new(q, cached_delta_q(q, DEFAULT_DELTA_N_MAX)?.delta_q))
    }

    /// `c_q`; `None` at the pole `q = 2`.
    pub fn c_q(&self) -> Option<f64> {
        (!is_two(self.q)).then(|| 1.0 / (2.0 - self.q.value()) - self.delta_q)
    }

    fn require_c_q(&self) -> Result<f64> {
        self.c_q()
            .ok_or_else(|| Error::invalid("q", "c_q has a pole at q = 2"))
    }
}

/// Precise q-Stirling approximation of `ln_q(n!_q)`.
pub fn q_stirling_precise(consts: &StirlingConstants, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    let q = consts.q;
    let nf = n as f64;
    if is_two(q) {
        return Ok(nf - 0.5 / nf - nf.ln() - 0.5 - consts.delta_q);
    }
    let c_q = consts.require_c_q()?;
    Ok(precise_body(q, nf)? + c_q)
}

/// `(n/(2-q) + 1/2) ln_q n - n/(2-q)`, the n-dependent part of the precise formula.
fn precise_body(q: Deformation, n: f64) -> Result<f64> {
    let w = 1.0 / (2.0 - q.value());
    Ok((n * w + 0.5) * q.ln(n)? - n * w)
}

pub const DEFAULT_DELTA_N_MAX: u64 = 1_000_000;

/// Abandon the extrapolation when consecutive estimates disagree by more than this.
pub const DELTA_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    pub q: Deformation,
    pub delta_q: f64,
    pub error_estimate: f64,
    pub n_max: u64,
}

/// Beyond this distance from `q = 1` the residual is summed in the
/// re-associated form of [`reassociated_residuals`].
const REASSOCIATE_BELOW: f64 = 0.25;

/// Series order used for the increments of `T(n)`.
const INCREMENT_ORDER: usize = 14;

fn direct_residuals(q: Deformation, schedule: &[u64]) -> Result<Vec<f64>> {
    let mut acc = CompensatedSum::new();
    let mut residuals = Vec::with_capacity(schedule.len());
    let mut next = 0;
    for k in 2..=*schedule.last().unwrap() {
        acc.add(q.ln(k as f64)?);
        if k == schedule[next] {
            let nf = k as f64;
            let exact = acc.value();
            let r = if is_two(q) {
                exact - (nf - 0.5 / nf - nf.ln() - 0.5)
            } else {
                exact - precise_body(q, nf)?
            };
            residuals.push(r);
            next += 1;
        }
    }
    Ok(residuals)
}

/// Same residuals as [`direct_residuals`], for `q` away from 1.
///
/// With `a = 1-q` and `H(n) = Σ_{k≤n} k^a`, the residual is exactly
/// `(T(n) + 1/2) / a` where `T(n) = H(n) - n^(a+1)/(a+1) - n^a/2`.
/// `ln_q(n!_q)` itself grows like `n^(2-q)` and loses the constant to
/// rounding, so `T` is accumulated from its increments
/// `T(n) - T(n-1) = n^a φ(1/n)`, whose series `φ(x) = Σ_{m≥2} c_m x^m`
/// is evaluated directly.
fn reassociated_residuals(q: Deformation, schedule: &[u64]) -> Vec<f64> {
    let a = q.one_minus();
    let b = a + 1.0;
    // c_m = -(-1)^m C(b, m+1)/b + (-1)^m C(a, m)/2
    let mut coeffs = [0.0; INCREMENT_ORDER + 1];
    let (mut cb, mut ca) = (b, 1.0);
    for (m, c) in coeffs.iter_mut().enumerate() {
        if m > 0 {
            let mf = m as f64;
            cb *= (b - mf) / (mf + 1.0);
            ca *= (a - mf + 1.0) / mf;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *c = if m < 2 { 0.0 } else { sign * (ca / 2.0 - cb / b) };
    }
    let phi = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);

    let start = schedule[0].min(1000);
    let head = compensated_sum((1..=start).map(|k| (k as f64).powf(a)));
    let sf = start as f64;
    let mut t = CompensatedSum::new();
    t.add(head);
    t.add(-sf.powf(b) / b);
    t.add(-sf.powf(a) / 2.0);

    let mut residuals = Vec::with_capacity(schedule.len());
    let mut next = 0;
    if schedule[0] == start {
        residuals.push((t.value() + 0.5) / a);
        next = 1;
    }
    for k in start + 1..=*schedule.last().unwrap() {
        let kf = k as f64;
        t.add(kf.powf(a) * phi(1.0 / kf));
        if k == schedule[next] {
            residuals.push((t.value() + 0.5) / a);
            next += 1;
        }
    }
    residuals
}

/// Recovers `δ_q` from the residual of the precise q-Stirling formula.
///
/// The residual `R(n) = ln_q(n!_q) - [(n/(2-q)+1/2) ln_q n - n/(2-q)]`
/// tends to `c_q` with corrections in `n^-q, n^-(q+2), n^-(q+4), …`
/// (Euler–Maclaurin applied to `Σ k^(1-q)`). It is sampled on
/// `n_max/8, n_max/4, n_max/2, n_max` and those three corrections are
/// removed by Richardson extrapolation. For `q = 2` the same is done with
/// the `q = 2` formula, whose residual tends to `-δ_2`.
pub fn estimate_delta_q(q: Deformation, n_max: u64) -> Result<DeltaEstimate> {
    if n_max < 1000 {
        return Err(Error::invalid("n_max", "must be at least 1000"));
    }
    if q.value() <= 0.0 {
        return Err(DomainViolation::new("estimate_delta_q", q.value(), "q > 0").into());
    }
    let base = n_max / 8;
    let schedule: Vec<u64> = (0..4).map(|i| base << i).collect();

    let residuals = if q.one_minus().abs() >= REASSOCIATE_BELOW && q.value() < 2.0 {
        reassociated_residuals(q, &schedule)
    } else {
        direct_residuals(q, &schedule)?
    };

    // Richardson table, ratio 2, exponents q, q+2, q+4.
    let mut table = vec![residuals];
    for level in 1..4 {
        let p = q.value() + 2.0 * (level - 1) as f64;
        let factor = 2f64.powf(p);
        let prev = &table[level - 1];
        let row: Vec<f64> = prev
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        table.push(row);
    }
    let limit = table[3][0];
    let error_estimate = (limit - table[2][1])
        .abs()
        .max((table[2][1] - table[2][0]).abs())
        .max(f64::EPSILON * limit.abs());

    let delta_q = if is_two(q) {
        -limit
    } else {
        1.0 / (2.0 - q.value()) - limit
    };
    if !delta_q.is_finite() || error_estimate > DELTA_TOLERANCE {
        return Err(Error::NotConverged {
            estimate: error_estimate,
            tolerance: DELTA_TOLERANCE,
        });
    }
    Ok(DeltaEstimate {
        q,
        delta_q,
        error_estimate,
        n_max: schedule[3],
    })
}

type DeltaKey = (u64, u64);

fn delta_cache() -> &'static RwLock<HashMap<DeltaKey, DeltaEstimate>> {
    static CACHE: OnceLock<RwLock<HashMap<DeltaKey, DeltaEstimate>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`estimate_delta_q`].
pub fn cached_delta_q(q: Deformation, n_max: u64) -> Result<DeltaEstimate> {
    let key = (q.value().to_bits(), n_max);
    if let Some(e) = delta_cache().read().unwrap().get(&key) {
        return Ok(*e);
    }
    let e = estimate_delta_q(q, n_max)?;
    delta_cache().write().unwrap().insert(key, e);
    Ok(e)
}

/// Exact `ln_q` of the q-multinomial coefficient, `ln_q n!_q - Σ ln_q n_i!_q`.
pub fn q_ln_multinomial_coeff(q: Deformation, counts: &CountVector) -> Result<f64> {
    let table = LnFactorialTable::new(q, counts.total());
    Ok(table.ln_multinomial(counts.counts()))
}

/// Tsallis entropy `(1 - Σ p_i^q)/(q - 1)`, Shannon entropy at `q = 1`.
///
/// Evaluated as `-Σ p_i ln_{2-q} p_i`, which is equal on the simplex and
/// has no cancellation near `q = 1`.
pub fn tsallis_entropy(q: Deformation, p: &ProbabilityVector) -> Result<f64> {
    if q.value() <= 0.0 {
        return Err(DomainViolation::new("tsallis_entropy", q.value(), "q > 0").into());
    }
    let dual = q.dual();
    Ok(-compensated_sum(
        p.iter()
            .filter(|&&pi| pi > 0.0)
            .map(|&pi| pi * dual.ln(pi).expect("pi > 0")),
    ))
}

/// Entropy form of `ln_q` of the q-multinomial coefficient, valid for large `n`:
/// `n^(2-q)/(2-q) · S_{2-q}(n_i/n)` for `q ≠ 2`, `-ln n + Σ ln n_i` at `q = 2`.
pub fn approx_ln_multinomial_via_entropy(q: Deformation, counts: &CountVector) -> Result<f64> {
    if q.value() <= 0.0 {
        return Err(DomainViolation::new("approx_ln_multinomial_via_entropy", q.value(), "q > 0").into());
    }
    let n = counts.total() as f64;
    if is_two(q) {
        let blocks = compensated_sum(
            counts
                .counts()
                .iter()
                .filter(|&&c| c >= 1)
                .map(|&c| (c as f64).ln()),
        );
        return Ok(-n.ln() + blocks);
    }
    let a = 2.0 - q.value();
    Ok(n.powf(a) / a * tsallis_entropy(q.dual(), &counts.proportions())?)
}

/// Asymptotic `ln_q` of the q-binomial coefficient from the precise q-Stirling formula.
pub fn q_ln_binomial_coeff_approx(consts: &StirlingConstants, n: u64, k: u64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("{k} is outside [1, n-1] for n = {n}")));
    }
    let c_q = consts.require_c_q()?;
    let q = consts.q;
    let (nf, kf) = (n as f64, k as f64);
    let a = 2.0 - q.value();
    let half = 0.5 * (q.ln(nf)? - q.ln(kf)? - q.ln(nf - kf)?);
    let p = ProbabilityVector::bernoulli(kf / nf)?;
    Ok(-c_q + half + nf.powf(a) / a * tsallis_entropy(q.dual(), &p)?)
}
