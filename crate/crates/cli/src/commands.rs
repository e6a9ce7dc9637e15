use tsallis_ldp::combinatorics::{
    cached_delta_q, estimate_delta_q, q_ln_factorial, q_stirling_precise, q_stirling_rough, StirlingConstants,
};
use tsallis_ldp::distribution::record::write_record;
use tsallis_ldp::divergence::{alpha_divergence, check_alpha_q_relation, kl_divergence, q_divergence};
use tsallis_ldp::ldp::ldp_scan;
use tsallis_ldp::{Deformation, ProbabilityVector, QBinomialPmf, QBinomialSpec};

use crate::table::{Cell, Config, Table};
use crate::{CliError, DivergenceArgs, Format, LdpArgs, Output, PmfArgs, QfunArgs, StirlingArgs};

fn non_empty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::validation(name, "grid is empty"));
    }
    Ok(())
}

fn finite(name: &str, v: &[f64]) -> Result<(), CliError> {
    match v.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(CliError::validation(name, format!("{x} is not finite"))),
        None => Ok(()),
    }
}

fn positive(name: &str, v: &[f64]) -> Result<(), CliError> {
    match v.iter().find(|x| !(**x > 0.0)) {
        Some(x) => Err(CliError::validation(name, format!("{x} is not positive"))),
        None => Ok(()),
    }
}

fn deformations(q: &[f64]) -> Result<Vec<Deformation>, CliError> {
    non_empty("q", q)?;
    finite("q", q)?;
    Ok(q.iter().map(|&v| Deformation::new(v).expect("finite")).collect())
}

fn base_config(command: &str, format: Format) -> Config {
    let mut c = Config::default();
    c.push("command", command);
    c.push("format", format);
    c
}

pub fn qfun(a: &QfunArgs) -> Result<Table, CliError> {
    let qs = deformations(&a.q)?;
    non_empty("x", &a.x)?;
    finite("x", &a.x)?;
    positive("x", &a.x)?;
    finite("y", &a.y)?;
    positive("y", &a.y)?;

    let mut cfg = base_config("qfun", a.output.format);
    cfg.push_list("q", &a.q);
    cfg.push_list("x", &a.x);
    cfg.push_list("y", &a.y);

    let binary = !a.y.is_empty();
    let mut columns = vec!["q", "x"];
    if binary {
        columns.push("y");
    }
    columns.extend(["q_ln", "q_exp", "q_exp_cutoff"]);
    if binary {
        columns.extend(["q_product", "q_ratio"]);
    }
    let mut t = Table::new(cfg, columns);
    let ys: Vec<Option<f64>> = if binary {
        a.y.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    for &q in &qs {
        for &x in &a.x {
            for &y in &ys {
                let mut row = vec![Cell::from(q.value()), Cell::from(x)];
                if let Some(y) = y {
                    row.push(y.into());
                }
                row.push(q.ln(x).ok().into());
                row.push(q.exp(x).ok().into());
                row.push(q.exp_cutoff(x).ok().into());
                if let Some(y) = y {
                    row.push(q.product(x, y).ok().into());
                    row.push(q.ratio(x, y).ok().into());
                }
                t.push(row);
            }
        }
    }
    Ok(t)
}

pub fn stirling(a: &StirlingArgs) -> Result<Table, CliError> {
    let qs = deformations(&a.q)?;
    positive("q", &a.q)?;
    non_empty("n", &a.n)?;
    let min_n = if a.estimate_delta { 1000 } else { 2 };
    if let Some(n) = a.n.iter().find(|&&n| n < min_n) {
        return Err(CliError::validation("n", format!("{n} is below {min_n}")));
    }

    let mut cfg = base_config("stirling", a.output.format);
    cfg.push_list("q", &a.q);
    cfg.push_list("n", &a.n);
    cfg.push("estimate_delta", a.estimate_delta);

    if a.estimate_delta {
        let mut t = Table::new(cfg, vec!["q", "n_max", "delta_q", "c_q", "error_estimate"]);
        for &q in &qs {
            for &n in &a.n {
                let est = estimate_delta_q(q, n)?;
                let c_q = StirlingConstants::new(q, est.delta_q).c_q();
                t.push(vec![
                    q.value().into(),
                    est.n_max.into(),
                    est.delta_q.into(),
                    c_q.into(),
                    est.error_estimate.into(),
                ]);
            }
        }
        return Ok(t);
    }

    let mut t = Table::new(
        cfg,
        vec![
            "q",
            "n",
            "delta_q",
            "c_q",
            "exact",
            "rough",
            "precise",
            "rough_residual",
            "precise_residual",
        ],
    );
    for &q in &qs {
        let consts = if q.is_classical() {
            StirlingConstants::classical()
        } else {
            StirlingConstants::new(q, cached_delta_q(q, 1_000_000)?.delta_q)
        };
        for &n in &a.n {
            let exact = q_ln_factorial(q, n)?;
            let rough = q_stirling_rough(q, n)?;
            let precise = q_stirling_precise(&consts, n)?;
            t.push(vec![
                q.value().into(),
                n.into(),
                consts.delta_q.into(),
                consts.c_q().into(),
                exact.into(),
                rough.into(),
                precise.into(),
                (rough - exact).into(),
                (precise - exact).into(),
            ]);
        }
    }
    Ok(t)
}

pub fn pmf(a: &PmfArgs) -> Result<Output, CliError> {
    deformations(&a.q)?;
    non_empty("n", &a.n)?;
    let specs = a
        .q
        .iter()
        .flat_map(|&q| a.n.iter().map(move |&n| QBinomialSpec::new(q, n, a.r)))
        .collect::<Result<Vec<_>, _>>()?;
    if a.samples == Some(0) {
        return Err(CliError::validation("samples", "must be positive"));
    }
    if a.output.format == Format::Record {
        if specs.len() != 1 {
            return Err(CliError::validation("format", "record output holds exactly one pmf"));
        }
        let pmf = QBinomialPmf::build(&specs[0])?;
        return Ok(Output::Text(write_record(&pmf)));
    }

    let mut cfg = base_config("pmf", a.output.format);
    cfg.push_list("q", &a.q);
    cfg.push_list("n", &a.n);
    cfg.push("r", a.r);
    match a.samples {
        Some(m) => cfg.push("samples", m),
        None => cfg.push("samples", "none"),
    }
    cfg.push("seed", a.seed);

    let mut columns = vec![
        "q",
        "n",
        "r",
        "k",
        "probability",
        "ln_probability",
        "q_log_mass",
        "c_q",
        "scaling",
        "solver_iterations",
        "solver_residual",
        "cutoff_count",
    ];
    if a.samples.is_some() {
        columns.push("sample_frequency");
    }
    let mut t = Table::new(cfg, columns);
    for spec in &specs {
        let pmf = QBinomialPmf::build(spec)?;
        let freq = a.samples.map(|m| {
            let mut counts = vec![0u64; pmf.probabilities.len()];
            for k in pmf.sample(a.seed, m) {
                counts[k as usize] += 1;
            }
            counts.into_iter().map(|c| c as f64 / m as f64).collect::<Vec<_>>()
        });
        for k in 0..=spec.n() {
            let i = k as usize;
            let mut row = vec![
                spec.q().value().into(),
                spec.n().into(),
                spec.r().into(),
                k.into(),
                pmf.probabilities[i].into(),
                pmf.ln_probabilities[i].into(),
                pmf.q_log_masses[i].into(),
                pmf.c_q.into(),
                pmf.report.scaling.into(),
                pmf.report.iterations.into(),
                pmf.report.residual.into(),
                pmf.report.cutoff_count.into(),
            ];
            if let Some(f) = &freq {
                row.push(f[i].into());
            }
            t.push(row);
        }
    }
    Ok(Output::Table(t))
}

pub fn divergence(a: &DivergenceArgs) -> Result<Table, CliError> {
    if a.q.is_empty() && a.alpha.is_empty() {
        return Err(CliError::validation("q", "give at least one --q or --alpha"));
    }
    finite("q", &a.q)?;
    finite("alpha", &a.alpha)?;
    if let Some(q) = a.q.iter().find(|&&q| !(q > 0.0 && q < 2.0)) {
        return Err(CliError::validation("q", format!("{q} is outside (0, 2)")));
    }
    let p = ProbabilityVector::new(a.p.clone())?;
    let r = ProbabilityVector::new(a.r.clone())?;
    if p.len() != r.len() {
        return Err(CliError::validation("r", "p and r differ in length"));
    }

    let mut cfg = base_config("divergence", a.output.format);
    cfg.push_list("q", &a.q);
    cfg.push_list("alpha", &a.alpha);
    cfg.push_list("p", &a.p);
    cfg.push_list("r", &a.r);

    let kl = kl_divergence(&p, &r)?;
    let mut t = Table::new(
        cfg,
        vec![
            "source",
            "q",
            "alpha",
            "q_divergence",
            "alpha_divergence",
            "kl_divergence",
            "relation_residual",
        ],
    );
    let points = a
        .q
        .iter()
        .map(|&q| ("q", q, 1.0 - 2.0 * q))
        .chain(a.alpha.iter().map(|&al| ("alpha", 0.5 * (1.0 - al), al)));
    for (source, qv, alpha) in points {
        let in_window = qv > 0.0 && qv < 2.0;
        let q = Deformation::new(qv).expect("finite");
        let qd = if in_window { Some(q_divergence(q, &p, &r)?) } else { None };
        let ad = alpha_divergence(alpha, &p, &r)?;
        let rel = if in_window && !q.is_classical() {
            Some(check_alpha_q_relation(q, &p, &r)?)
        } else {
            None
        };
        t.push(vec![
            source.into(),
            qv.into(),
            alpha.into(),
            qd.into(),
            ad.into(),
            kl.into(),
            rel.into(),
        ]);
    }
    Ok(t)
}

pub fn ldp(a: &LdpArgs) -> Result<Table, CliError> {
    non_empty("q", &a.q)?;
    finite("q", &a.q)?;
    let mut cfg = base_config("ldp", a.output.format);
    cfg.push_list("q", &a.q);
    cfg.push_list("n", &a.n);
    cfg.push("r", a.r);
    cfg.push("x", a.x);

    let rows = ldp_scan(&a.q, &a.n, a.r, a.x)?;
    let mut t = Table::new(
        cfg,
        vec![
            "q",
            "n",
            "r",
            "x",
            "floor_nx",
            "c_q",
            "tail",
            "ln_tail",
            "empirical_rate",
            "theoretical_rate",
            "gap",
            "lower_bound",
            "upper_bound",
            "monotone_ok",
            "sandwich_ok",
            "lower_rate_bound",
            "upper_rate_bound",
            "proof_case",
            "proof_inequalities_ok",
            "error",
        ],
    );
    for row in rows {
        t.push(vec![
            row.q.into(),
            row.n.into(),
            row.r.into(),
            row.x.into(),
            row.floor_index.into(),
            row.c_q.into(),
            row.tail.into(),
            row.ln_tail.into(),
            row.empirical_rate.into(),
            row.theoretical_rate.into(),
            row.gap().into(),
            row.lower_bound_value.into(),
            row.upper_bound_value.into(),
            row.monotone_precondition_ok.into(),
            row.sandwich_ok.into(),
            row.lower_rate_bound.into(),
            row.upper_rate_bound.into(),
            row.proof_case.label().into(),
            row.proof_inequalities_ok.into(),
            row.error.as_deref().into(),
        ]);
    }
    Ok(t)
}
