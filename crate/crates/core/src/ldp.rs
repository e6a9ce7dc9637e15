//! Large-deviation harness for the q-binomial law.
//!
//! For `0 < x < r` the lower tail `P = Σ_{k≤⌊nx⌋} b_q(k; n, r)` is compared
//! against the rate function `D_{2-q}((x,1-x) ‖ (r,1-r)) / (2-q)` through
//! the empirical q-rate `-ln_q(P) / n^(2-q)`. The sandwich
//! `b_q(⌊nx⌋) ≤ P ≤ (⌊nx⌋+1) b_q(⌊nx⌋)` is evaluated explicitly; its upper
//! half needs the pmf to be non-decreasing up to `⌊nx⌋`, which is checked
//! rather than assumed.
//!
//! Tails are carried as natural logarithms because at `q = 1` they fall far
//! below the smallest `f64`.

use crate::combinatorics::LnFactorialTable;
use crate::deformed::Deformation;
use crate::distribution::{QBinomialPmf, QBinomialSpec};
use crate::divergence::q_divergence;
use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// Relative rounding slack when comparing log-domain sandwich ends.
const SANDWICH_SLACK: f64 = 1e-14;

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid(name, format!("{v} is outside (0, 1)")));
    }
    Ok(())
}

fn check_below_r(x: f64, r: f64) -> Result<()> {
    check_unit("x", x)?;
    if x >= r {
        return Err(Error::invalid("x", format!("{x} is not below r = {r}")));
    }
    Ok(())
}

/// `D_{2-q}((x,1-x) ‖ (r,1-r)) / (2-q)`.
pub fn rate_function(q: Deformation, x: f64, r: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("r", r)?;
    let qv = q.value();
    if qv <= 0.0 || qv >= 2.0 {
        return Err(Error::invalid("q", format!("{qv} is outside (0, 2)")));
    }
    let p = ProbabilityVector::bernoulli(x)?;
    let rr = ProbabilityVector::bernoulli(r)?;
    Ok(q_divergence(q.dual(), &p, &rr)? / (2.0 - qv))
}

fn scale(pmf: &QBinomialPmf) -> f64 {
    (pmf.n() as f64).powf(2.0 - pmf.spec.q().value())
}

/// `-ln_q(P) / n^(2-q)` for the tail below `x`.
pub fn empirical_rate(pmf: &QBinomialPmf, x: f64) -> Result<f64> {
    let ln_tail = pmf.ln_cdf_below(x)?;
    if ln_tail == f64::NEG_INFINITY {
        return Err(Error::ZeroTail { x });
    }
    Ok(-pmf.spec.q().ln_from_log(ln_tail) / scale(pmf))
}

/// The proof's sandwich of the tail probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// `⌊nx⌋`.
    pub floor_index: u64,
    pub tail: f64,
    pub ln_tail: f64,
    /// `b_q(⌊nx⌋)`.
    pub lower: f64,
    pub ln_lower: f64,
    /// `(⌊nx⌋ + 1) b_q(⌊nx⌋)`.
    pub upper: f64,
    pub ln_upper: f64,
    /// `b_q(k)` is non-decreasing for `k = 0..=⌊nx⌋`.
    pub monotone_ok: bool,
}

impl TailBounds {
    /// `lower ≤ tail ≤ upper`, compared in log space.
    pub fn sandwich_holds(&self) -> bool {
        let le = |a: f64, b: f64| {
            a == f64::NEG_INFINITY || a <= b + SANDWICH_SLACK * b.abs().max(1.0)
        };
        le(self.ln_lower, self.ln_tail) && le(self.ln_tail, self.ln_upper)
    }
}

/// Lower and upper bounds on the tail below `x`, for `0 < x < r`.
pub fn bounds(pmf: &QBinomialPmf, x: f64) -> Result<TailBounds> {
    check_below_r(x, pmf.spec.r())?;
    let m = pmf.floor_index(x);
    let ln_tail = pmf.ln_cdf_below(x)?;
    let ln_lower = pmf.ln_probabilities[m as usize];
    let ln_upper = ((m + 1) as f64).ln() + ln_lower;
    let monotone_ok = pmf.ln_probabilities[..=m as usize]
        .windows(2)
        .all(|w| w[0] <= w[1]);
    Ok(TailBounds {
        floor_index: m,
        tail: ln_tail.exp(),
        ln_tail,
        lower: ln_lower.exp(),
        ln_lower,
        upper: ln_upper.exp(),
        ln_upper,
        monotone_ok,
    })
}

/// Which branch of the upper-bound argument applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofCase {
    /// `q = 1`: plain logarithms.
    Classical,
    /// `0 < q < 1`: `ln_q A_n = ln_q b + b^(1-q) ln_q(⌊nx⌋+1)`.
    BelowOne,
    /// `1 < q < 2`: `ln_q A_n < ln A_n`.
    AboveOne,
}

impl ProofCase {
    pub fn of(q: Deformation) -> Self {
        if q.is_classical() {
            ProofCase::Classical
        } else if q.value() < 1.0 {
            ProofCase::BelowOne
        } else {
            ProofCase::AboveOne
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProofCase::Classical => "i",
            ProofCase::BelowOne => "ii",
            ProofCase::AboveOne => "iii",
        }
    }
}

/// Pointwise check of `ln_q a < ln a` and `ln a < a - 1` (used for `q > 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofInequalities {
    pub checked: usize,
    pub failures: usize,
}

impl ProofInequalities {
    pub fn all_hold(&self) -> bool {
        self.failures == 0
    }

    fn check(q: Deformation, ln_args: &[f64]) -> Self {
        let mut out = ProofInequalities { checked: 0, failures: 0 };
        for &ln_a in ln_args {
            // a = 1 turns both into equalities
            if ln_a == 0.0 || !ln_a.is_finite() {
                continue;
            }
            out.checked += 1;
            let ok = q.ln_from_log(ln_a) < ln_a && ln_a < ln_a.exp_m1();
            if !ok {
                out.failures += 1;
            }
        }
        out
    }
}

/// Bounds on `ln_q(P) / n^(2-q)` obtained by pushing the tail sandwich
/// through `ln_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub case: ProofCase,
    /// `ln_q b_q(⌊nx⌋) / n^(2-q)`.
    pub lower_rate_bound: f64,
    /// `ln_q A_n / n^(2-q)` with `A_n = (⌊nx⌋+1) b_q(⌊nx⌋)`.
    pub upper_rate_bound: f64,
    /// `ln_q(P) / n^(2-q)`, i.e. minus the empirical rate.
    pub neg_empirical_rate: f64,
    /// The term dropped from the upper bound as `n` grows:
    /// `ln(⌊nx⌋+1)/n`, `ln_q(⌊nx⌋+1)/n^(2-q)` or `ln(⌊nx⌋+1)/n^(2-q)` by case.
    pub discarded_term: f64,
    /// `|ln_q A_n - ln_q b - b^(1-q) ln_q(⌊nx⌋+1)|` for `q < 1`.
    pub decomposition_gap: Option<f64>,
    /// `ln A_n / n^(2-q)`, which dominates the upper bound for `q > 1`.
    pub log_upper_rate_bound: Option<f64>,
    pub inequalities: Option<ProofInequalities>,
}

impl RateBounds {
    pub fn brackets_empirical(&self) -> bool {
        let slack = SANDWICH_SLACK * self.neg_empirical_rate.abs().max(1e-300);
        self.lower_rate_bound <= self.neg_empirical_rate + slack
            && self.neg_empirical_rate <= self.upper_rate_bound + slack
    }
}

/// Rate-level bounds following the three-case argument.
///
/// A cut-off tail (`q < 1`) is not an error here: `ln_q 0 = -1/(1-q)` is finite.
pub fn three_case_rate_bounds(pmf: &QBinomialPmf, x: f64) -> Result<RateBounds> {
    let tb = bounds(pmf, x)?;
    let q = pmf.spec.q();
    let s = scale(pmf);
    let m1 = (tb.floor_index + 1) as f64;
    let case = ProofCase::of(q);

    let lq_lower = q.ln_from_log(tb.ln_lower);
    let lq_upper = q.ln_from_log(tb.ln_upper);
    let lq_tail = q.ln_from_log(tb.ln_tail);

    let (discarded_term, decomposition_gap, log_upper_rate_bound, inequalities) = match case {
        ProofCase::Classical => (m1.ln() / s, None, None, None),
        ProofCase::BelowOne => {
            let lq_m1 = q.ln(m1)?;
            let b_pow = (q.one_minus() * tb.ln_lower).exp();
            let gap = (lq_upper - (lq_lower + b_pow * lq_m1)).abs();
            (lq_m1 / s, Some(gap), None, None)
        }
        ProofCase::AboveOne => {
            let checks = ProofInequalities::check(q, &[tb.ln_upper, tb.ln_lower, tb.ln_tail]);
            (m1.ln() / s, None, Some(tb.ln_upper / s), Some(checks))
        }
    };

    Ok(RateBounds {
        case,
        lower_rate_bound: lq_lower / s,
        upper_rate_bound: lq_upper / s,
        neg_empirical_rate: lq_tail / s,
        discarded_term,
        decomposition_gap,
        log_upper_rate_bound,
        inequalities,
    })
}

/// One `(q, n)` point of an LDP scan.
#[derive(Debug, Clone, PartialEq)]
pub struct RateScanRow {
    pub q: f64,
    pub n: u64,
    pub r: f64,
    pub x: f64,
    pub floor_index: u64,
    pub c_q: Option<f64>,
    pub tail: Option<f64>,
    pub ln_tail: Option<f64>,
    pub empirical_rate: Option<f64>,
    pub theoretical_rate: f64,
    pub lower_bound_value: Option<f64>,
    pub upper_bound_value: Option<f64>,
    pub monotone_precondition_ok: bool,
    pub sandwich_ok: Option<bool>,
    pub lower_rate_bound: Option<f64>,
    pub upper_rate_bound: Option<f64>,
    pub proof_case: ProofCase,
    /// Only evaluated for `q > 1`.
    pub proof_inequalities_ok: Option<bool>,
    pub error: Option<String>,
}

impl RateScanRow {
    /// `|empirical_rate - theoretical_rate|`, when the empirical rate exists.
    pub fn gap(&self) -> Option<f64> {
        self.empirical_rate.map(|e| (e - self.theoretical_rate).abs())
    }
}

fn scan_row(spec: QBinomialSpec, table: &LnFactorialTable, x: f64, theoretical_rate: f64) -> RateScanRow {
    let q = spec.q();
    let mut row = RateScanRow {
        q: q.value(),
        n: spec.n(),
        r: spec.r(),
        x,
        floor_index: ((spec.n() as f64 * x).floor() as u64).min(spec.n()),
        c_q: None,
        tail: None,
        ln_tail: None,
        empirical_rate: None,
        theoretical_rate,
        lower_bound_value: None,
        upper_bound_value: None,
        monotone_precondition_ok: false,
        sandwich_ok: None,
        lower_rate_bound: None,
        upper_rate_bound: None,
        proof_case: ProofCase::of(q),
        proof_inequalities_ok: None,
        error: None,
    };
    let pmf = match QBinomialPmf::build_with_table(&spec, table) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.c_q = Some(pmf.c_q);
    let tb = match bounds(&pmf, x) {
        Ok(tb) => tb,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.tail = Some(tb.tail);
    row.ln_tail = Some(tb.ln_tail);
    row.lower_bound_value = Some(tb.lower);
    row.upper_bound_value = Some(tb.upper);
    row.monotone_precondition_ok = tb.monotone_ok;
    row.sandwich_ok = Some(tb.sandwich_holds());

    match empirical_rate(&pmf, x) {
        Ok(v) => row.empirical_rate = Some(v),
        Err(e) => row.error = Some(e.to_string()),
    }
    if let Ok(rb) = three_case_rate_bounds(&pmf, x) {
        row.lower_rate_bound = Some(rb.lower_rate_bound);
        row.upper_rate_bound = Some(rb.upper_rate_bound);
        row.proof_inequalities_ok = rb.inequalities.map(|i| i.all_hold());
    }
    row
}

/// One row per `(q, n)`, ordered by `q_list` then `n_list`.
///
/// Failures of individual rows (no normalization, empty tail) are recorded
/// in the row's `error` field; only invalid scan parameters abort.
pub fn ldp_scan(q_list: &[f64], n_list: &[u64], r: f64, x: f64) -> Result<Vec<RateScanRow>> {
    if q_list.is_empty() || n_list.is_empty() {
        return Err(Error::invalid("grid", "q and n lists must be non-empty"));
    }
    check_unit("r", r)?;
    check_below_r(x, r)?;
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::invalid("n", "must be positive and strictly ascending"));
    }
    let qs = q_list
        .iter()
        .map(|&q| Deformation::in_window(q))
        .collect::<Result<Vec<_>>>()?;
    let n_max = *n_list.last().unwrap();

    let tasks: Vec<(usize, u64)> = (0..qs.len())
        .flat_map(|i| n_list.iter().map(move |&n| (i, n)))
        .collect();
    let run = |tables: &[LnFactorialTable], rates: &[f64], &(i, n): &(usize, u64)| {
        let spec = QBinomialSpec::new(qs[i].value(), n, r).expect("validated");
        scan_row(spec, &tables[i], x, rates[i])
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let tables: Vec<LnFactorialTable> = qs.par_iter().map(|&q| LnFactorialTable::new(q, n_max)).collect();
        let rates = qs
            .iter()
            .map(|&q| rate_function(q, x, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(tasks.par_iter().map(|t| run(&tables, &rates, t)).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let tables: Vec<LnFactorialTable> = qs.iter().map(|&q| LnFactorialTable::new(q, n_max)).collect();
        let rates = qs
            .iter()
            .map(|&q| rate_function(q, x, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(tasks.iter().map(|t| run(&tables, &rates, t)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> Deformation {
        Deformation::new(v).unwrap()
    }

    #[test]
    fn rate_function_examples() {
        let kl = 0.3 * 0.6f64.ln() + 0.7 * 1.4f64.ln();
        assert!((rate_function(q(1.0), 0.3, 0.5).unwrap() - kl).abs() < 1e-15);
        for v in [0.3, 1.0, 1.7] {
            assert!(rate_function(q(v), 0.42, 0.42).unwrap().abs() < 1e-15);
        }
        assert!(rate_function(q(2.0), 0.3, 0.5).is_err());
        assert!(rate_function(q(1.0), 0.0, 0.5).is_err());
    }

    #[test]
    fn classical_hand_bounds() {
        let pmf = QBinomialPmf::build(&QBinomialSpec::new(1.0, 4, 0.5).unwrap()).unwrap();
        let tb = bounds(&pmf, 0.3).unwrap();
        assert_eq!(tb.floor_index, 1);
        assert!((tb.tail - 5.0 / 16.0).abs() < 1e-15);
        assert!((tb.lower - 4.0 / 16.0).abs() < 1e-15);
        assert!((tb.upper - 8.0 / 16.0).abs() < 1e-15);
        assert!(tb.monotone_ok && tb.sandwich_holds());
    }

    #[test]
    fn single_term_bounds_are_tight() {
        let pmf = QBinomialPmf::build(&QBinomialSpec::new(1.3, 10, 0.5).unwrap()).unwrap();
        let tb = bounds(&pmf, 0.05).unwrap();
        assert_eq!(tb.floor_index, 0);
        assert_eq!(tb.lower, tb.upper);
        assert_eq!(tb.tail, pmf.probabilities[0]);
        assert!(tb.sandwich_holds());
    }

    #[test]
    fn bounds_require_x_below_r() {
        let pmf = QBinomialPmf::build(&QBinomialSpec::new(1.0, 10, 0.5).unwrap()).unwrap();
        assert!(bounds(&pmf, 0.5).is_err());
        assert!(bounds(&pmf, 0.7).is_err());
    }

    #[test]
    fn tail_near_one_has_small_rate() {
        let pmf = QBinomialPmf::build(&QBinomialSpec::new(1.4, 50, 0.5).unwrap()).unwrap();
        let rate = empirical_rate(&pmf, 0.99).unwrap();
        assert!(rate > 0.0 && rate < 1e-3, "{rate}");
    }

    #[test]
    fn zero_tail_is_reported() {
        let pmf = QBinomialPmf::build(&QBinomialSpec::new(0.5, 100, 0.5).unwrap()).unwrap();
        assert!(matches!(empirical_rate(&pmf, 0.3), Err(Error::ZeroTail { .. })));
        let rb = three_case_rate_bounds(&pmf, 0.3).unwrap();
        assert_eq!(rb.lower_rate_bound, rb.upper_rate_bound);
        assert!(rb.brackets_empirical());
        assert_eq!(rb.decomposition_gap, Some(0.0));
    }

    #[test]
    fn scan_validates_grid() {
        assert!(ldp_scan(&[], &[10], 0.5, 0.3).is_err());
        assert!(ldp_scan(&[1.0], &[100, 10], 0.5, 0.3).is_err());
        assert!(ldp_scan(&[1.0], &[10], 0.5, 0.6).is_err());
        assert!(ldp_scan(&[2.5], &[10], 0.5, 0.3).is_err());
    }

    #[test]
    fn scan_rows_are_ordered() {
        let rows = ldp_scan(&[0.7, 1.0, 1.3], &[10, 20], 0.5, 0.3).unwrap();
        let keys: Vec<(f64, u64)> = rows.iter().map(|r| (r.q, r.n)).collect();
        assert_eq!(keys, vec![(0.7, 10), (0.7, 20), (1.0, 10), (1.0, 20), (1.3, 10), (1.3, 20)]);
    }
}
