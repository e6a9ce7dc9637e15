//! Browser bindings for three interactive views: q-function curves,
//! a q-binomial pmf, and empirical rates against the rate function.
//!
//! Results cross the boundary as flat `Float64Array`s; undefined points are NaN.

use tsallis_ldp::ldp::ldp_scan;
use tsallis_ldp::{Deformation, QBinomialPmf, QBinomialSpec};
use wasm_bindgen::prelude::*;

/// Rows of `[x, ln_q x, exp_q x (cutoff)]` on an even grid over `[lo, hi]`.
pub fn curves(q: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    let d = Deformation::new(q).map_err(|e| e.to_string())?;
    if !(lo < hi) || points < 2 {
        return Err("need lo < hi and at least two points".into());
    }
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        out.push(x);
        out.push(d.ln(x).unwrap_or(f64::NAN));
        out.push(d.exp_cutoff(x).unwrap_or(f64::NAN));
    }
    Ok(out)
}

/// `[c_q, b_q(0), …, b_q(n)]`.
pub fn pmf(q: f64, n: u64, r: f64) -> Result<Vec<f64>, String> {
    if n > 100_000 {
        return Err("n is capped at 100000 in the demo".into());
    }
    let spec = QBinomialSpec::new(q, n, r).map_err(|e| e.to_string())?;
    let pmf = QBinomialPmf::build(&spec).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(pmf.probabilities.len() + 1);
    out.push(pmf.c_q);
    out.extend(&pmf.probabilities);
    Ok(out)
}

/// Rows of `[n, empirical_rate, theoretical_rate]` for `n = 10, 20, 50, 100, …` up to `n_max`.
pub fn rates(q: f64, r: f64, x: f64, n_max: u64) -> Result<Vec<f64>, String> {
    let ns: Vec<u64> = (1..=5)
        .flat_map(|e| [1, 2, 5].map(|m| m * 10u64.pow(e)))
        .filter(|&n| n <= n_max.min(20_000))
        .collect();
    let rows = ldp_scan(&[q], &ns, r, x).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|row| [row.n as f64, row.empirical_rate.unwrap_or(f64::NAN), row.theoretical_rate])
        .collect())
}

#[wasm_bindgen(js_name = qCurves)]
pub fn q_curves(q: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    curves(q, lo, hi, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = qBinomialPmf)]
pub fn q_binomial_pmf(q: f64, n: u32, r: f64) -> Result<Vec<f64>, JsError> {
    pmf(q, n.into(), r).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = rateScan)]
pub fn rate_scan(q: f64, r: f64, x: f64, n_max: u32) -> Result<Vec<f64>, JsError> {
    rates(q, r, x, n_max.into()).map_err(|e| JsError::new(&e))
}
