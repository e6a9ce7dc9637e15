//! Root finder for the scaling constant `C_q`.
//!
//! Given q-log masses `s_k`, find `C` with `Σ_k exp_q(s_k + C) = 1`, using
//! the cutoff convention for `q < 1`. The objective is handled in log
//! space, `f(C) = ln Σ_k exp_q(s_k + C)`, which is continuous and strictly
//! increasing wherever a term is alive and has derivative
//! `f'(C) = Σ b_k^q / Σ b_k`.

use crate::deformed::Deformation;
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

pub const MAX_ITERATIONS: usize = 200;
/// Required `|Σ b_k - 1|` at the returned root.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// Allowed `|ln Σ e^{s_k}|` before `C_1 = 0` is accepted at `q = 1`.
pub const CLASSICAL_TOLERANCE: f64 = 1e-10;

/// Diagnostics of one normalization solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub newton_steps: usize,
    /// `|Σ_k b_k - 1|` at the root.
    pub residual: f64,
    /// Final bracketing interval.
    pub bracket: (f64, f64),
    /// Number of outcomes assigned zero mass by the cutoff.
    pub cutoff_count: usize,
    /// `1 + (1-q) C_q`, which must be positive.
    pub scaling: f64,
    /// Every evaluated point was consistent with a single sign change.
    pub single_sign_change: bool,
}

/// Natural log of `exp_q(s + c)` with the cutoff convention; `None` past
/// the pole for `q > 1`.
#[inline]
fn ln_mass(q: Deformation, y: f64) -> Option<f64> {
    if q.is_classical() {
        return Some(y);
    }
    let a = q.one_minus();
    let t = a * y;
    if t <= -1.0 {
        if a > 0.0 {
            Some(f64::NEG_INFINITY)
        } else {
            None
        }
    } else {
        Some(t.ln_1p() / a)
    }
}

/// `ln b_k` for every mass at the given constant.
pub fn ln_masses(q: Deformation, s: &[f64], c: f64) -> Vec<f64> {
    s.iter()
        .map(|&sk| ln_mass(q, sk + c).unwrap_or(f64::INFINITY))
        .collect()
}

struct Objective<'a> {
    q: Deformation,
    s: &'a [f64],
    buf: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(q: Deformation, s: &'a [f64]) -> Self {
        Self {
            q,
            s,
            buf: vec![0.0; s.len()],
        }
    }

    /// `(f, f')` at `c`. `f = +inf` beyond the pole, `-inf` when every term is cut off.
    fn eval(&mut self, c: f64) -> (f64, f64) {
        for (slot, &sk) in self.buf.iter_mut().zip(self.s) {
            match ln_mass(self.q, sk + c) {
                Some(v) => *slot = v,
                None => return (f64::INFINITY, f64::INFINITY),
            }
        }
        let f = log_sum_exp(&self.buf);
        if !f.is_finite() {
            return (f, f64::NAN);
        }
        // b_k^(q-1) = 1 / (1 + (1-q) y_k)
        let a = self.q.one_minus();
        let mut d = 0.0;
        for (&lb, &sk) in self.buf.iter().zip(self.s) {
            if lb > f64::NEG_INFINITY {
                d += (lb - f).exp() / (1.0 + a * (sk + c));
            }
        }
        (f, d)
    }
}

/// Solves for `C_q` given the q-log masses.
pub fn solve(q: Deformation, s: &[f64]) -> Result<(f64, SolverReport)> {
    solve_with_bracket(q, s, None)
}

/// Like [`solve`] but starting from a caller-supplied bracket, which is
/// widened if it does not straddle the root.
pub fn solve_with_bracket(
    q: Deformation,
    s: &[f64],
    initial: Option<(f64, f64)>,
) -> Result<(f64, SolverReport)> {
    if s.is_empty() {
        return Err(Error::NoBracket("no outcomes".into()));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoBracket("non-finite q-log mass".into()));
    }
    let s_max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    if q.is_classical() {
        let f = log_sum_exp(s);
        if f.abs() > CLASSICAL_TOLERANCE {
            return Err(Error::NoBracket(format!(
                "classical masses sum to exp({f:e}), expected 1"
            )));
        }
        let report = SolverReport {
            iterations: 0,
            newton_steps: 0,
            residual: f.exp_m1().abs(),
            bracket: (0.0, 0.0),
            cutoff_count: 0,
            scaling: 1.0,
            single_sign_change: true,
        };
        return Ok((0.0, report));
    }

    let mut obj = Objective::new(q, s);
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut evaluate = |obj: &mut Objective, c: f64| {
        let r = obj.eval(c);
        history.push((c, r.0));
        r
    };

    let a = q.one_minus();
    // Edge of the feasible region: the pole for q > 1, total cutoff for q < 1.
    let edge = -1.0 / a - s_max;

    let (mut lo, mut hi) = match initial {
        Some((l, h)) if l < h => (l, h),
        _ if a < 0.0 => (edge - 1.0, edge - 0.5),
        _ => (edge, edge + 1.0),
    };
    if a < 0.0 {
        hi = hi.min(edge - f64::EPSILON * edge.abs().max(1.0));
        lo = lo.min(hi - 1.0);
    } else {
        lo = lo.max(edge);
        hi = hi.max(lo + 1.0);
    }

    // widen downwards until f(lo) < 0
    let mut step = (hi - lo).max(1.0);
    let mut guard = 0;
    while evaluate(&mut obj, lo).0 >= 0.0 {
        lo -= step;
        step *= 2.0;
        guard += 1;
        if guard > 2000 || !lo.is_finite() {
            return Err(Error::NoBracket("sum never drops below 1".into()));
        }
    }
    // widen upwards until f(hi) > 0
    guard = 0;
    if a < 0.0 {
        let mut gap = edge - hi;
        while evaluate(&mut obj, hi).0 <= 0.0 {
            gap *= 0.5;
            let next = edge - gap;
            if next <= hi || gap == 0.0 {
                return Err(Error::NoBracket("sum stays below 1 up to the pole".into()));
            }
            hi = next;
            guard += 1;
            if guard > 2000 {
                return Err(Error::NoBracket("sum stays below 1 up to the pole".into()));
            }
        }
    } else {
        let mut step = (hi - lo).max(1.0);
        while evaluate(&mut obj, hi).0 <= 0.0 {
            hi += step;
            step *= 2.0;
            guard += 1;
            if guard > 2000 || !hi.is_finite() {
                return Err(Error::NoBracket("sum never reaches 1".into()));
            }
        }
    }

    let mut iterations = 0;
    let mut newton_steps = 0;
    let mut x = 0.5 * (lo + hi);
    let mut fx;
    loop {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            let (f, _) = obj.eval(x);
            return Err(Error::SolverDiverged {
                iterations: MAX_ITERATIONS,
                residual: f.exp_m1().abs(),
            });
        }
        let (f, d) = evaluate(&mut obj, x);
        fx = f;
        if f == 0.0 {
            lo = x;
            hi = x;
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        let newton = x - f / d;
        if f.is_finite() && d.is_finite() && d > 0.0 && newton > lo && newton < hi {
            if (newton - x).abs() <= f64::EPSILON * x.abs().max(1.0) {
                break;
            }
            x = newton;
            newton_steps += 1;
        } else {
            x = 0.5 * (lo + hi);
        }
    }

    // The last iterate is the best of the evaluated points near the root.
    let c = x;
    let residual = fx.exp_m1().abs();
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::SolverDiverged { iterations, residual });
    }

    history.sort_by(|p, r| p.0.total_cmp(&r.0));
    let single_sign_change = history.windows(2).all(|w| w[0].1 <= w[1].1);

    let cutoff_count = ln_masses(q, s, c)
        .iter()
        .filter(|v| **v == f64::NEG_INFINITY)
        .count();
    let report = SolverReport {
        iterations,
        newton_steps,
        residual,
        bracket: (lo, hi),
        cutoff_count,
        scaling: 1.0 + a * c,
        single_sign_change,
    };
    Ok((c, report))
}
