//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.
//!
//! Tolerances and runtime limits are pinned in the constants below.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsallis_ldp::combinatorics::{
    approx_ln_multinomial_via_entropy, cached_delta_q, estimate_delta_q, q_ln_factorial, q_ln_multinomial_coeff,
    q_stirling_precise, q_stirling_rough,
};
use tsallis_ldp::divergence::{check_alpha_q_relation, divergence_correspondence_residual};
use tsallis_ldp::ldp::ldp_scan;
use tsallis_ldp::numeric::compensated_sum;
use tsallis_ldp::{CountVector, Deformation, ProbabilityVector, QBinomialPmf, QBinomialSpec, StirlingConstants};

mod common;

const LAW_TOL: f64 = 1e-12;
const DELTA_ONE: f64 = 0.081_061_466_795_327_26;
const DELTA_ONE_TOL: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-10;
const C_ONE_TOL: f64 = 1e-8;
const BINOMIAL_REL_TOL: f64 = 1e-10;
const KL_03_05: f64 = 0.082_282;
const CLASSICAL_RATE_REL_TOL: f64 = 0.05;
const RELATION_TOL: f64 = 1e-12;
const RELATION_PAIRS: usize = 10_000;

const STANDARD_Q: [f64; 7] = [0.3, 0.5, 0.7, 1.0, 1.3, 1.5, 1.8];
const STANDARD_R: [f64; 3] = [0.2, 0.5, 0.7];
const STANDARD_FRAC: [f64; 3] = [0.1, 0.4, 0.9];
const N_SCHEDULE: [u64; 3] = [100, 1000, 10_000];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn q(v: f64) -> Deformation {
    Deformation::new(v).unwrap()
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

fn fmt_seq(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn algebra_laws() -> Outcome {
    let qs = [0.3, 0.7, 1.0, 1.3, 1.8];
    let (mut inverse, mut homo, mut law) = (0.0f64, 0.0f64, 0.0f64);
    let xs = log_grid(1e-2, 1e2, 41);
    let pts: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.05).collect();
    for v in qs {
        let d = q(v);
        for x in log_grid(1e-3, 1e3, 601) {
            let back = d.exp(d.ln(x).unwrap()).unwrap();
            inverse = inverse.max((back - x).abs() / x);
        }
        for &x in &xs {
            for &y in &xs {
                let Ok(p) = d.product(x, y) else { continue };
                let (lx, ly) = (d.ln(x).unwrap(), d.ln(y).unwrap());
                homo = homo.max((d.ln(p).unwrap() - lx - ly).abs() / (1.0 + lx.abs() + ly.abs()));
            }
        }
        for &a in &pts {
            for &b in &pts {
                let (Ok(ea), Ok(eb), Ok(eab)) = (d.exp(a), d.exp(b), d.exp(a + b)) else {
                    continue;
                };
                let Ok(p) = d.product(ea, eb) else { continue };
                law = law.max((p - eab).abs() / eab);
            }
        }
    }
    Outcome::new(
        inverse <= LAW_TOL && homo <= LAW_TOL && law <= LAW_TOL,
        format!("worst relative: inverse {inverse:.1e}, homomorphism {homo:.1e}, exponential law {law:.1e}"),
    )
}

fn delta_one() -> Outcome {
    match estimate_delta_q(q(1.0), 1_000_000) {
        Ok(e) => {
            let err = (e.delta_q - DELTA_ONE).abs();
            Outcome::new(err <= DELTA_ONE_TOL, format!("delta_1 = {:.12}, |error| {err:.1e}", e.delta_q))
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn precise_beats_rough() -> Outcome {
    let mut failures = Vec::new();
    for v in [0.3, 0.5, 1.0, 1.3, 1.8] {
        let d = q(v);
        let consts = match cached_delta_q(d, 1_000_000) {
            Ok(e) => StirlingConstants::new(d, e.delta_q),
            Err(e) => return Outcome::new(false, format!("q = {v}: {e}")),
        };
        let mut precise = Vec::new();
        for n in N_SCHEDULE {
            let exact = q_ln_factorial(d, n).unwrap();
            let p = (q_stirling_precise(&consts, n).unwrap() - exact).abs();
            let r = (q_stirling_rough(d, n).unwrap() - exact).abs();
            if p >= r {
                failures.push(format!("q = {v}, n = {n}: precise {p:.2e} >= rough {r:.2e}"));
            }
            precise.push(p);
        }
        if !strictly_decreasing(&precise) {
            failures.push(format!("q = {v}: precise residuals {}", fmt_seq(&precise)));
        }
    }
    Outcome::new(failures.is_empty(), failures.first().cloned().unwrap_or_else(|| "15 points".into()))
}

fn entropy_correspondence() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for v in [0.5, 1.0, 1.5] {
        let gaps: Vec<f64> = N_SCHEDULE
            .iter()
            .map(|&n| {
                let c = CountVector::new(vec![3 * n / 10, 7 * n / 10]).unwrap();
                let exact = q_ln_multinomial_coeff(q(v), &c).unwrap();
                let approx = approx_ln_multinomial_via_entropy(q(v), &c).unwrap();
                (exact - approx).abs() / exact.abs()
            })
            .collect();
        pass &= strictly_decreasing(&gaps);
        lines.push(format!("q = {v}: {}", fmt_seq(&gaps)));
    }
    Outcome::new(pass, lines.join("; "))
}

fn normalization() -> Outcome {
    let (mut worst, mut c_one, mut min_base) = (0.0f64, 0.0f64, f64::INFINITY);
    for v in STANDARD_Q {
        for n in [10, 50, 200] {
            for r in STANDARD_R {
                let pmf = match QBinomialPmf::build(&QBinomialSpec::new(v, n, r).unwrap()) {
                    Ok(p) => p,
                    Err(e) => return Outcome::new(false, format!("q = {v}, n = {n}, r = {r}: {e}")),
                };
                worst = worst.max((compensated_sum(pmf.probabilities.iter().copied()) - 1.0).abs());
                min_base = min_base.min(1.0 + (1.0 - v) * pmf.c_q);
                if v == 1.0 {
                    c_one = c_one.max(pmf.c_q.abs());
                }
            }
        }
    }
    Outcome::new(
        worst <= NORMALIZATION_TOL && min_base > 0.0 && c_one <= C_ONE_TOL,
        format!("worst |sum - 1| {worst:.1e}, min 1+(1-q)C_q {min_base:.3}, max |C_1| {c_one:.1e}"),
    )
}

fn exact_binomial(n: u64, r: f64) -> Vec<f64> {
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0f64, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    (0..=n)
        .map(|k| {
            let (k_, m) = (k as usize, (n - k) as usize);
            (ln_fact[n as usize] - ln_fact[k_] - ln_fact[m] + k as f64 * r.ln() + (n - k) as f64 * (1.0 - r).ln()).exp()
        })
        .collect()
}

fn classical_recovery() -> Outcome {
    let mut worst = 0.0f64;
    for n in [1, 2, 5, 10, 20, 50, 100, 200] {
        for r in STANDARD_R {
            let pmf = QBinomialPmf::build(&QBinomialSpec::new(1.0, n, r).unwrap()).unwrap();
            for (got, want) in pmf.probabilities.iter().zip(exact_binomial(n, r)) {
                worst = worst.max((got - want).abs() / want);
            }
        }
    }
    let rate = ldp_scan(&[1.0], &[10_000], 0.5, 0.3)
        .ok()
        .and_then(|rows| rows[0].empirical_rate);
    let Some(rate) = rate else {
        return Outcome::new(false, "no empirical rate at q = 1, n = 10^4");
    };
    let rel = (rate - KL_03_05).abs() / KL_03_05;
    Outcome::new(
        worst <= BINOMIAL_REL_TOL && rel <= CLASSICAL_RATE_REL_TOL,
        format!("worst pmf relative {worst:.1e}; empirical rate {rate:.6}, relative gap {rel:.2e}"),
    )
}

fn divergence_correspondence() -> Outcome {
    let mut failed = Vec::new();
    let mut diagnostic_failed = Vec::new();
    let mut cells = 0;
    for v in STANDARD_Q {
        for r in STANDARD_R {
            for frac in STANDARD_FRAC {
                cells += 1;
                let mut scaled = Vec::new();
                let mut mass_scaled = Vec::new();
                let mut err = None;
                for n in N_SCHEDULE {
                    let pmf = QBinomialPmf::build(&QBinomialSpec::new(v, n, r).unwrap()).unwrap();
                    let k = (frac * n as f64).round() as u64;
                    match divergence_correspondence_residual(&pmf, k) {
                        Ok(res) => {
                            let term = res.divergence_term;
                            scaled.push(res.scaled.unwrap().abs());
                            // same residual with s_k + C_q standing in for ln_q of the cut-off probability
                            mass_scaled.push(((pmf.q_log_masses[k as usize] + term) / term).abs());
                        }
                        Err(e) => {
                            err.get_or_insert(e.to_string());
                            let term = (n as f64).powf(2.0 - v) / (2.0 - v)
                                * tsallis_ldp::divergence::q_divergence(
                                    q(v).dual(),
                                    &ProbabilityVector::bernoulli(k as f64 / n as f64).unwrap(),
                                    &ProbabilityVector::bernoulli(r).unwrap(),
                                )
                                .unwrap();
                            mass_scaled.push(((pmf.q_log_masses[k as usize] + term) / term).abs());
                        }
                    }
                }
                if !strictly_decreasing(&mass_scaled) {
                    diagnostic_failed.push(format!("q = {v}, r = {r}, k/n = {frac}"));
                }
                match err {
                    Some(e) => failed.push(format!("q = {v}, r = {r}, k/n = {frac}: {e}")),
                    None if !strictly_decreasing(&scaled) => {
                        failed.push(format!("q = {v}, r = {r}, k/n = {frac}: {}", fmt_seq(&scaled)))
                    }
                    None => {}
                }
            }
        }
    }
    let cut_off = failed.iter().filter(|f| f.contains("cut off")).count();
    let mut detail = format!(
        "{}/{cells} cells decrease ({cut_off} hit a cut-off outcome, {} non-monotone); \
         q-log-mass diagnostic decreases in {}/{cells}",
        cells - failed.len(),
        failed.len() - cut_off,
        cells - diagnostic_failed.len()
    );
    if let Some(first) = failed.first() {
        detail.push_str(&format!("; first failure {first}"));
    }
    Outcome::new(failed.is_empty(), detail)
}

fn random_simplex(rng: &mut ChaCha8Rng, len: usize) -> ProbabilityVector {
    let w: Vec<f64> = (0..len).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    ProbabilityVector::normalized(w).unwrap()
}

fn alpha_q_relation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < RELATION_PAIRS {
        let v: f64 = rng.random_range(0.0..2.0);
        if v == 0.0 || (v - 1.0).abs() < 1e-6 {
            continue;
        }
        let len = rng.random_range(2..=6);
        let p = random_simplex(&mut rng, len);
        let r = random_simplex(&mut rng, len);
        match check_alpha_q_relation(q(v), &p, &r) {
            Ok(d) => worst = worst.max(d),
            Err(e) => return Outcome::new(false, format!("q = {v}: {e}")),
        }
        checked += 1;
    }
    Outcome::new(worst <= RELATION_TOL, format!("{checked} pairs, worst discrepancy {worst:.1e}"))
}

fn ldp_sandwich_and_trend() -> Outcome {
    let qs: Vec<f64> = (1..20).map(|i| i as f64 * 0.1).collect();
    let mut rows_checked = 0;
    let mut problems = Vec::new();
    for (r, x, ns) in [(0.5, 0.45, vec![10u64]), (0.5, 0.3, vec![100, 1000]), (0.7, 0.2, vec![50, 400])] {
        for row in ldp_scan(&qs, &ns, r, x).unwrap() {
            if row.monotone_precondition_ok {
                rows_checked += 1;
                if row.sandwich_ok != Some(true) {
                    problems.push(format!("sandwich at q = {}, n = {}", row.q, row.n));
                }
            }
            if row.q > 1.0 && row.proof_inequalities_ok == Some(false) {
                problems.push(format!("inequalities at q = {}, n = {}", row.q, row.n));
            }
        }
    }
    let mut trends = Vec::new();
    for v in [0.5, 1.0, 1.5] {
        let rows = ldp_scan(&[v], &N_SCHEDULE, 0.5, 0.3).unwrap();
        let gaps: Vec<Option<f64>> = rows.iter().map(|r| r.gap()).collect();
        let shown: Vec<String> = gaps
            .iter()
            .zip(&rows)
            .map(|(g, r)| match g {
                Some(g) => format!("{g:.3e}"),
                None => r.error.clone().unwrap_or_else(|| "no gap".into()),
            })
            .collect();
        let values: Option<Vec<f64>> = gaps.into_iter().collect();
        if !values.is_some_and(|g| strictly_decreasing(&g)) {
            problems.push(format!("trend at q = {v}"));
        }
        trends.push(format!("q = {v}: [{}]", shown.join(", ")));
    }
    Outcome::new(
        problems.is_empty(),
        format!(
            "{rows_checked} sandwich rows; gaps {}{}",
            trends.join("; "),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", problems.join(", "))
            }
        ),
    )
}

fn cli_golden() -> Outcome {
    let mut differing = Vec::new();
    for (name, args) in common::CASES {
        let (code, out, _) = common::run(args);
        let expected = std::fs::read(common::golden(name)).unwrap_or_default();
        if code != 0 || out != expected || common::run(args).1 != out {
            differing.push(*name);
        }
    }
    Outcome::new(
        differing.is_empty(),
        format!("{} fixtures, differing: {differing:?}", common::CASES.len()),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "q-algebra laws", Duration::from_secs(1), algebra_laws),
        (2, "delta_1 recovery", Duration::from_secs(10), delta_one),
        (3, "precise beats rough", Duration::from_secs(30), precise_beats_rough),
        (4, "entropy correspondence", Duration::MAX, entropy_correspondence),
        (5, "q-binomial normalization", Duration::from_secs(30), normalization),
        (6, "classical recovery", Duration::from_secs(60), classical_recovery),
        (7, "divergence correspondence", Duration::MAX, divergence_correspondence),
        (8, "alpha-q relation", Duration::from_secs(5), alpha_q_relation),
        (9, "LDP sandwich, proof steps and trend", Duration::from_secs(120), ldp_sandwich_and_trend),
        (10, "CLI golden files", Duration::MAX, cli_golden),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit_note = if limit == Duration::MAX {
            String::new()
        } else {
            format!(" / limit {:.0} s", limit.as_secs_f64())
        };
        println!(
            "{} criterion {id:>2} {name}: {} ({:.2} s{limit_note}{})",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" },
        );
    }
    println!("{}/10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
