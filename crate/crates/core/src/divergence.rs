//! q-divergence, KL divergence and α-divergence, and the correspondence
//! between the q-binomial law and the q-divergence.
//!
//! Conventions: `0 · ln(0/r) = 0`, `0^q = 0`; an atom with `p_i > 0` and
//! `r_i = 0` is a support violation and is reported, never turned into an
//! infinity.

use crate::deformed::{Deformation, CLASSICAL_WINDOW};
use crate::distribution::{QBinomialPmf, QMultinomialPmf};
use crate::error::{DomainViolation, Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::simplex::ProbabilityVector;

/// Width of the `α = ±1` limit windows.
pub const ALPHA_LIMIT_WINDOW: f64 = 1e-9;

fn same_length(p: &[f64], r: &[f64]) -> Result<()> {
    if p.len() != r.len() {
        return Err(Error::invalid(
            "r",
            format!("length {} differs from length {} of p", r.len(), p.len()),
        ));
    }
    Ok(())
}

fn support_violation(function: &'static str, i: usize) -> Error {
    DomainViolation::new(function, i as f64, "r_i > 0 wherever p_i > 0").into()
}

fn kl_terms(function: &'static str, p: &[f64], r: &[f64]) -> Result<f64> {
    same_length(p, r)?;
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&pi, &ri)) in p.iter().zip(r).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if ri == 0.0 {
            return Err(support_violation(function, i));
        }
        terms.push(pi * (pi / ri).ln());
    }
    Ok(compensated_sum(terms))
}

/// Kullback–Leibler divergence `Σ p_i ln(p_i / r_i)`.
pub fn kl_divergence(p: &ProbabilityVector, r: &ProbabilityVector) -> Result<f64> {
    kl_terms("kl_divergence", p, r)
}

/// q-divergence `(1 - Σ p_i^q r_i^(1-q)) / (1-q) = Σ p_i ln_{2-q}(p_i/r_i)`,
/// KL divergence at `q = 1`.
pub fn q_divergence(q: Deformation, p: &ProbabilityVector, r: &ProbabilityVector) -> Result<f64> {
    let qv = q.value();
    if qv <= 0.0 || qv >= 2.0 {
        return Err(DomainViolation::new("q_divergence", qv, "0 < q < 2").into());
    }
    if q.is_classical() {
        return kl_terms("q_divergence", p, r);
    }
    same_length(p, r)?;
    // Σ r_i [q p_i/r_i + (1-q) - (p_i/r_i)^q] / (1-q): every term is
    // non-negative, so nearly equal p and r lose no digits.
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&pi, &ri)) in p.iter().zip(r.iter()).enumerate() {
        if pi > 0.0 && ri == 0.0 {
            return Err(support_violation("q_divergence", i));
        }
        if ri > 0.0 {
            terms.push(ri * binomial_gap(qv, pi / ri - 1.0));
        }
    }
    Ok(qv * compensated_sum(terms))
}

/// `((1+u)^c - 1 - c u) / (c (c-1))` for `u ≥ -1`, `c ∉ {0, 1}`, `c > 0` when `u = -1`.
///
/// Non-negative for every admissible `c`; the two divergences are sums of
/// this with opposite weightings.
fn binomial_gap(c: f64, u: f64) -> f64 {
    if u == -1.0 {
        return 1.0 / c;
    }
    if u.abs() < 0.25 {
        // Σ_{j≥2} C(c, j) / (c (c-1)) u^j
        let mut coeff = 0.5;
        let mut power = u * u;
        let mut acc = CompensatedSum::new();
        for j in 2..80 {
            let term = coeff * power;
            acc.add(term);
            if term.abs() <= 1e-18 * acc.value().abs() {
                break;
            }
            coeff *= (c - j as f64) / (j as f64 + 1.0);
            power *= u;
        }
        return acc.value();
    }
    let l = u.ln_1p();
    // expm1(t l) / t, tending to l as t -> 0
    let e1 = |t: f64| if t == 0.0 { l } else { (t * l).exp_m1() / t };
    if (c - 1.0).abs() < 0.5 {
        ((1.0 + u) * e1(c - 1.0) - u) / c
    } else {
        (e1(c) - u) / (c - 1.0)
    }
}

/// α-divergence.
///
/// For `α ≠ ±1`, `4/(1-α²) (1 - Σ p_i^((1-α)/2) r_i^((1+α)/2))`; KL(p‖r) at
/// `α = -1` and KL(r‖p) at `α = 1`.
pub fn alpha_divergence(alpha: f64, p: &ProbabilityVector, r: &ProbabilityVector) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("{alpha} is not finite")));
    }
    if (alpha + 1.0).abs() < ALPHA_LIMIT_WINDOW {
        return kl_terms("alpha_divergence", p, r);
    }
    if (alpha - 1.0).abs() < ALPHA_LIMIT_WINDOW {
        return kl_terms("alpha_divergence", r, p);
    }
    same_length(p, r)?;
    let a = 0.5 * (1.0 - alpha);
    let b = 0.5 * (1.0 + alpha);
    for (i, (&pi, &ri)) in p.iter().zip(r.iter()).enumerate() {
        if (pi > 0.0 && ri == 0.0) || (pi == 0.0 && ri > 0.0 && a <= 0.0) {
            return Err(support_violation("alpha_divergence", i));
        }
    }
    // 4/(1-α²) (1 - Σ p^a r^b) = Σ p_i g_b(r_i/p_i - 1), with p_i = 0
    // atoms contributing r_i / a.
    let terms: Vec<f64> = p
        .iter()
        .zip(r.iter())
        .filter(|(&pi, &ri)| pi > 0.0 || ri > 0.0)
        .map(|(&pi, &ri)| if pi == 0.0 { ri / a } else { pi * binomial_gap(b, ri / pi - 1.0) })
        .collect();
    Ok(compensated_sum(terms))
}

/// `α = 1 - 2q`.
pub fn alpha_from_q(q: Deformation) -> f64 {
    1.0 - 2.0 * q.value()
}

/// `q = (1 - α) / 2`.
pub fn q_from_alpha(alpha: f64) -> Result<Deformation> {
    Deformation::new(0.5 * (1.0 - alpha))
}

/// Relative discrepancy between `D^(1-2q)` and `D_q / q`.
pub fn check_alpha_q_relation(q: Deformation, p: &ProbabilityVector, r: &ProbabilityVector) -> Result<f64> {
    let qv = q.value();
    if qv.abs() < CLASSICAL_WINDOW || q.is_classical() {
        return Err(DomainViolation::new("check_alpha_q_relation", qv, "q ≠ 0, 1").into());
    }
    let lhs = alpha_divergence(alpha_from_q(q), p, r)?;
    let rhs = q_divergence(q, p, r)? / qv;
    let scale = lhs.abs().max(rhs.abs());
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale })
}

/// Residual of `ln_q b_q(k) ≃ -n^(2-q)/(2-q) D_{2-q}(p‖r) + C_q` at one outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrespondenceResidual {
    /// `ln_q b_q(k)` minus the divergence form.
    pub residual: f64,
    /// `n^(2-q)/(2-q) · D_{2-q}(p‖r)`.
    pub divergence_term: f64,
    /// `residual / divergence_term`; `None` when the divergence vanishes.
    pub scaled: Option<f64>,
}

impl CorrespondenceResidual {
    fn new(q_ln_prob: f64, divergence_term: f64, c_q: f64) -> Self {
        let residual = q_ln_prob - (-divergence_term + c_q);
        let scaled = (divergence_term != 0.0).then(|| residual / divergence_term);
        Self {
            residual,
            divergence_term,
            scaled,
        }
    }
}

fn correspondence_term(q: Deformation, n: u64, p: &ProbabilityVector, r: &ProbabilityVector) -> Result<f64> {
    let a = 2.0 - q.value();
    Ok((n as f64).powf(a) / a * q_divergence(q.dual(), p, r)?)
}

fn binomial_pair(pmf: &QBinomialPmf, k: u64) -> Result<(ProbabilityVector, ProbabilityVector)> {
    let n = pmf.n();
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("{k} is outside [1, n-1] for n = {n}")));
    }
    Ok((
        ProbabilityVector::bernoulli(k as f64 / n as f64)?,
        ProbabilityVector::bernoulli(pmf.spec.r())?,
    ))
}

/// Correspondence residual of a q-binomial pmf at outcome `k`, `1 ≤ k ≤ n-1`.
pub fn divergence_correspondence_residual(pmf: &QBinomialPmf, k: u64) -> Result<CorrespondenceResidual> {
    let (p, r) = binomial_pair(pmf, k)?;
    let lq = pmf.q_ln_probability(k)?;
    let term = correspondence_term(pmf.spec.q(), pmf.n(), &p, &r)?;
    Ok(CorrespondenceResidual::new(lq, term, pmf.c_q))
}

/// The same residual written through the α-divergence,
/// `-n^((3+α)/2) D^(-2-α)(p‖r) + C_q` with `α = 1 - 2q`.
pub fn corollary_residual(pmf: &QBinomialPmf, k: u64) -> Result<CorrespondenceResidual> {
    let (p, r) = binomial_pair(pmf, k)?;
    let lq = pmf.q_ln_probability(k)?;
    let alpha = alpha_from_q(pmf.spec.q());
    let term = (pmf.n() as f64).powf(0.5 * (3.0 + alpha)) * alpha_divergence(-2.0 - alpha, &p, &r)?;
    Ok(CorrespondenceResidual::new(lq, term, pmf.c_q))
}

/// Correspondence residual of a q-multinomial pmf at one composition.
pub fn multinomial_correspondence_residual(
    pmf: &QMultinomialPmf,
    composition: &[u64],
) -> Result<CorrespondenceResidual> {
    let idx = pmf
        .compositions
        .iter()
        .position(|c| c == composition)
        .ok_or_else(|| Error::invalid("composition", format!("{composition:?} is not a composition of n")))?;
    let prob = pmf.probabilities[idx];
    if prob == 0.0 {
        return Err(DomainViolation::new("q_ln", 0.0, "x > 0 (outcome is cut off)").into());
    }
    let lq = pmf.q.ln(prob)?;
    let n = pmf.n as f64;
    let p = ProbabilityVector::normalized(composition.iter().map(|&c| c as f64 / n).collect())?;
    let term = correspondence_term(pmf.q, pmf.n, &p, &pmf.rates)?;
    Ok(CorrespondenceResidual::new(lq, term, pmf.c_q))
}
