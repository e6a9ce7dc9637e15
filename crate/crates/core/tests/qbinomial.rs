use tsallis_ldp::distribution::{
    ln_q_pmf_unnormalized, q_multinomial_pmf_small, solve_normalization, solver,
};
use tsallis_ldp::{Deformation, ProbabilityVector, QBinomialPmf, QBinomialSpec};

const GRID_Q: [f64; 7] = [0.3, 0.5, 0.7, 1.0, 1.3, 1.5, 1.8];
const GRID_N: [u64; 3] = [10, 50, 200];
const GRID_R: [f64; 3] = [0.2, 0.5, 0.7];

fn build(q: f64, n: u64, r: f64) -> QBinomialPmf {
    QBinomialPmf::build(&QBinomialSpec::new(q, n, r).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let lf = |m: u64| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    lf(n) - lf(k) - lf(n - k)
}

#[test]
fn normalization_grid() {
    for q in GRID_Q {
        for n in GRID_N {
            for r in GRID_R {
                let pmf = build(q, n, r);
                let total: f64 = pmf.probabilities.iter().sum();
                assert!((total - 1.0).abs() <= 1e-10, "q = {q}, n = {n}, r = {r}");
                assert!(1.0 + (1.0 - q) * pmf.c_q > 0.0);
                assert!(pmf.report.residual <= 1e-12);
                if q == 1.0 {
                    assert!(pmf.c_q.abs() <= 1e-8);
                }
                let d = Deformation::new(q).unwrap();
                for (k, &p) in pmf.probabilities.iter().enumerate() {
                    let expected = d.exp_cutoff(pmf.q_log_masses[k] + pmf.c_q).unwrap();
                    assert!(rel(p, expected) <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn classical_recovery() {
    for n in [1u64, 5, 40, 200] {
        for r in GRID_R {
            let pmf = build(1.0, n, r);
            for k in 0..=n {
                let exact = (ln_choose(n, k) + k as f64 * r.ln() + (n - k) as f64 * (1.0 - r).ln()).exp();
                assert!(rel(pmf.probabilities[k as usize], exact) <= 1e-10, "n = {n}, k = {k}");
            }
        }
    }
}

#[test]
fn mirror_symmetry() {
    for q in GRID_Q {
        for n in GRID_N {
            let a = build(q, n, 0.3);
            let b = build(q, n, 0.7);
            for (x, y) in a.probabilities.iter().zip(b.probabilities.iter().rev()) {
                assert!((x - y).abs() <= 1e-12, "q = {q}, n = {n}");
            }
        }
    }
}

#[test]
fn continuity_near_classical() {
    for q in [1.0 - 1e-6, 1.0 + 1e-6] {
        let c = solve_normalization(&QBinomialSpec::new(q, 20, 0.3).unwrap()).unwrap();
        assert!(c.abs() <= 1e-4, "{c}");
    }
}

#[test]
fn perturbed_bracket_gives_same_root() {
    for q in [0.3, 0.6, 1.4, 1.8] {
        for n in [10u64, 200] {
            let spec = QBinomialSpec::new(q, n, 0.35).unwrap();
            let base = QBinomialPmf::build(&spec).unwrap();
            for (lo, hi) in [(-500.0, -400.0), (base.c_q - 3.0, base.c_q + 0.1), (10.0, 12.0)] {
                let other = QBinomialPmf::build_with_bracket(&spec, (lo, hi)).unwrap();
                assert!((other.c_q - base.c_q).abs() <= 1e-11, "q = {q}, n = {n}");
            }
        }
    }
}

#[test]
fn sampler_matches_pmf() {
    let m = 100_000usize;
    for (q, n, r) in [(0.6, 30, 0.4), (1.0, 25, 0.3), (1.5, 40, 0.5)] {
        let pmf = build(q, n, r);
        let mut freq = vec![0usize; n as usize + 1];
        for k in pmf.sample(2024, m) {
            freq[k as usize] += 1;
        }
        for (k, &p) in pmf.probabilities.iter().enumerate() {
            if p < 1e-3 {
                continue;
            }
            let se = (p * (1.0 - p) / m as f64).sqrt();
            let f = freq[k] as f64 / m as f64;
            assert!((f - p).abs() <= 5.0 * se, "q = {q}, k = {k}: {f} vs {p}");
        }
    }
}

#[test]
fn frozen_half_pmf() {
    // 50-digit bisection of the normalization, rounded to f64
    let expected = [
        0.0,
        0.0,
        0.0,
        0.0,
        0.208_770_031_607_846_72,
        0.582_459_936_784_306_6,
        0.208_770_031_607_846_72,
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    let pmf = build(0.5, 10, 0.5);
    assert!((pmf.c_q - 0.468_616_711_714_280_64).abs() <= 1e-12);
    for (p, e) in pmf.probabilities.iter().zip(expected) {
        assert!((p - e).abs() <= 1e-12, "{p} vs {e}");
    }
    let s5 = ln_q_pmf_unnormalized(&QBinomialSpec::new(0.5, 10, 0.5).unwrap(), 5).unwrap();
    assert!((s5 - -0.942_235_452_940_042_98).abs() <= 1e-13);
    assert_eq!(pmf.report.cutoff_count, 8);
}

#[test]
fn frozen_tail() {
    let pmf = build(1.3, 100, 0.5);
    assert!((pmf.c_q - -4.803_822_513_666_221).abs() <= 1e-10);
    let tail = pmf.cdf_below(0.3).unwrap();
    assert!(rel(tail, 0.148_557_192_715_370_15) <= 1e-10, "{tail}");
    assert!(rel(pmf.ln_cdf_below(0.3).unwrap().exp(), tail) <= 1e-13);
}

#[test]
fn frozen_multinomial() {
    let rates = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
    let cases: [(f64, u64, f64, &[(&[u64], f64)]); 2] = [
        (
            0.7,
            4,
            0.454_034_941_114_111_84,
            &[
                (&[0, 2, 2], 0.135_799_251_470_363_9),
                (&[1, 1, 2], 0.460_490_337_282_211_6),
                (&[2, 1, 1], 0.031_471_000_422_294_12),
                (&[4, 0, 0], 0.0),
            ],
        ),
        (
            1.5,
            6,
            -4.300_464_372_060_146,
            &[
                (&[0, 0, 6], 0.047_566_420_516_815_19),
                (&[1, 2, 3], 0.037_010_630_822_898_45),
                (&[2, 2, 2], 0.035_068_422_098_704_8),
                (&[6, 0, 0], 0.029_137_588_471_553_19),
            ],
        ),
    ];
    for (q, n, c, entries) in cases {
        let pmf = q_multinomial_pmf_small(Deformation::new(q).unwrap(), n, &rates).unwrap();
        assert!((pmf.c_q - c).abs() <= 1e-11, "q = {q}: {}", pmf.c_q);
        let map = pmf.to_map();
        for (comp, p) in entries {
            assert!((map[&comp.to_vec()] - p).abs() <= 1e-12, "q = {q}, {comp:?}");
        }
        let total: f64 = pmf.probabilities.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn large_laws_normalize() {
    for q in [0.4, 1.0, 1.6] {
        let pmf = build(q, 10_000, 0.5);
        let total: f64 = pmf.probabilities.iter().sum();
        assert!((total - 1.0).abs() <= 1e-10);
        assert!(pmf.report.single_sign_change);
        assert!(pmf.report.iterations <= solver::MAX_ITERATIONS);
    }
}
