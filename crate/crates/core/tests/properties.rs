// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use robust_ci::binomial::{
    lower_quantities, psi_hat_minus, psi_hat_plus, rbar_closed_form, robust_ci, upper_quantities,
    RobustCiConfig,
};
use robust_ci::dist::{binom_cdf, pois_cdf, tv_distance, FinitePmf};
use robust_ci::estimators::{bernoulli_ci, known_eps_ci};
use robust_ci::graph::{u_norm, SubsetSearchConfig};
use robust_ci::grid::EpsilonGrid;
use robust_ci::interval::wilson_type_bounds;
use robust_ci::poisson::{
    lower_quantities_pois, psi_hat_minus_pois, psi_hat_plus_pois, robust_ci_pois,
    upper_quantities_pois, PoissonCiConfig,
};
use robust_ci::sample::empirical_cdf;
use robust_ci::sim::{format_float, read_csv, write_csv, CsvRow};
use robust_ci::{Method, SampleSet};

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// `(m, sample)` with every value in `0..=m`.
fn binomial_sample() -> impl Strategy<Value = (u64, SampleSet)> {
    (1u64..9).prop_flat_map(|m| {
        prop::collection::vec(0..=m, 1..40).prop_map(move |v| (m, SampleSet::new(v).unwrap()))
    })
}

fn count_sample() -> impl Strategy<Value = SampleSet> {
    prop::collection::vec(0u64..25, 1..40).prop_map(|v| SampleSet::new(v).unwrap())
}

fn symmetric(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| {
        let mut b = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                b[i][j] = v[i * n + j];
                b[j][i] = v[i * n + j];
            }
        }
        b
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discretized_tests_are_monotone((m, s) in binomial_sample(), eps_max in 0.01f64..0.3) {
        let cfg = RobustCiConfig::new(m, s.n(), 0.05, eps_max).unwrap();
        for &e in EpsilonGrid::new(s.n(), 0.05, eps_max).unwrap().values() {
            let mut prev_plus = true;
            let mut prev_minus = false;
            for i in 0..=200 {
                let p = i as f64 / 200.0;
                let plus = psi_hat_plus(&s, p, e, &cfg).unwrap();
                let minus = psi_hat_minus(&s, p, e, &cfg).unwrap();
                prop_assert!(!plus || prev_plus, "psi+ rose at p={}", p);
                prop_assert!(minus || !prev_minus, "psi- fell at p={}", p);
                prev_plus = plus;
                prev_minus = minus;
            }
        }
    }

    #[test]
    fn poisson_discretized_tests_are_monotone(s in count_sample(), eps_max in 0.01f64..0.3) {
        let cfg = PoissonCiConfig::new(s.n(), 0.05, eps_max).unwrap();
        let cap = cfg.rate_cap(&s);
        for &e in EpsilonGrid::new(s.n(), 0.05, eps_max).unwrap().values() {
            let mut prev_plus = true;
            let mut prev_minus = false;
            for i in 0..=(cap * 20) {
                let l = i as f64 / 20.0;
                let plus = psi_hat_plus_pois(&s, l, e, &cfg).unwrap();
                let minus = psi_hat_minus_pois(&s, l, e, &cfg).unwrap();
                prop_assert!(!plus || prev_plus);
                prop_assert!(minus || !prev_minus);
                prev_plus = plus;
                prev_minus = minus;
            }
        }
    }

    #[test]
    fn lower_quantities_mirror_upper(m in 1u64..40, p in 0.0f64..=1.0, e in 0.0f64..0.2) {
        let cfg = RobustCiConfig::new(m, 500, 0.05, 0.2).unwrap();
        let up = upper_quantities(p, e, &cfg).unwrap();
        let lo = lower_quantities(1.0 - p, e, &cfg).unwrap();
        prop_assert!(close(lo.t, 1.0 - up.t));
        prop_assert!(close(lo.r, up.r));
        prop_assert!(close(lo.tau, up.tau));
    }

    #[test]
    fn threshold_stays_between_half_and_p(m in 2u64..60, frac in 0.0f64..=1.0, e in 0.0f64..0.2) {
        let cfg = RobustCiConfig::new(m, 500, 0.05, 0.2).unwrap();
        let p = frac * (1.0 - 1.0 / m as f64);
        let t = upper_quantities(p, e, &cfg).unwrap().t;
        prop_assert!(t >= p / 2.0 - 1e-12 && t <= p + 1e-12);
    }

    #[test]
    fn reach_is_strictly_increasing(m in 2u64..60, a in 0.001f64..=1.0, b in 0.001f64..=1.0, e in 0.0f64..0.2) {
        let cfg = RobustCiConfig::new(m, 2000, 0.05, 0.2).unwrap();
        let top = 1.0 - 1.0 / m as f64;
        let (p, q) = (a.min(b) * top, a.max(b) * top);
        prop_assume!(q > p);
        let rp = upper_quantities(p, e, &cfg).unwrap().r;
        let rq = upper_quantities(q, e, &cfg).unwrap().r;
        prop_assume!(rp.is_finite() && rq.is_finite());
        prop_assert!(q + rq > p + rp);
    }

    #[test]
    fn rate_reach_is_strictly_increasing(a in 0.01f64..50.0, b in 0.01f64..50.0, e in 0.0f64..0.05) {
        let (l, h) = (a.min(b), a.max(b));
        prop_assume!(h > l);
        let n = 10_000;
        let up = |x: f64| x + upper_quantities_pois(x, e, n, 0.05).unwrap().r;
        prop_assert!(up(h) > up(l));
        if l >= 1.0 {
            let down = |x: f64| x - lower_quantities_pois(x, e, n, 0.05).unwrap().r;
            prop_assert!(down(h) > down(l));
        }
    }

    #[test]
    fn rbar_closed_form_agrees(m in 1u64..60, frac in 0.0f64..=1.0, e in 0.0f64..0.2, n in 50usize..100_000) {
        let cfg = RobustCiConfig::new(m, n, 0.05, 0.2).unwrap();
        let p = frac * (1.0 - 1.0 / m as f64);
        let direct = upper_quantities(p, e, &cfg).unwrap().r;
        prop_assume!(direct.is_finite());
        prop_assert!(close(rbar_closed_form(p, e, &cfg).unwrap(), direct));
    }

    #[test]
    fn u_norm_is_a_seminorm(b in symmetric(6), c in symmetric(6), scale in -4.0f64..4.0) {
        let cfg = SubsetSearchConfig::default();
        let all: Vec<usize> = (0..6).collect();
        let nb = u_norm(&b, &all, &cfg).unwrap();
        let nc = u_norm(&c, &all, &cfg).unwrap();
        let sum: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| b[i][j] + c[i][j]).collect()).collect();
        let scaled: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(|x| scale * x).collect()).collect();
        prop_assert!(u_norm(&sum, &all, &cfg).unwrap() <= nb + nc + 1e-10);
        prop_assert!((u_norm(&scaled, &all, &cfg).unwrap() - scale.abs() * nb).abs() <= 1e-10 * (1.0 + nb));
        prop_assert!(nb >= 0.0);
    }

    #[test]
    fn constant_block_norm(c in -5.0f64..5.0, size in 2usize..8) {
        let n = 8;
        let b = vec![vec![c; n]; n];
        let cfg = SubsetSearchConfig::default();
        let restrict: Vec<usize> = (0..size).collect();
        let want = c.abs() * (size * (size - 1)) as f64;
        prop_assert!((u_norm(&b, &restrict, &cfg).unwrap() - want).abs() <= 1e-10 * (1.0 + want));
    }

    #[test]
    fn larger_parameters_shift_mass_up(m in 1u64..50, a in 0.0f64..=1.0, b in 0.0f64..=1.0, t in 0u64..50) {
        let (p, q) = (a.min(b), a.max(b));
        prop_assert!(binom_cdf(m, q, t as f64).unwrap() <= binom_cdf(m, p, t as f64).unwrap() + 1e-12);
        prop_assert!(pois_cdf(20.0 * q, t as f64).unwrap() <= pois_cdf(20.0 * p, t as f64).unwrap() + 1e-12);
    }

    #[test]
    fn total_variation_grows_with_separation(m in 1u64..40, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (pp, p) = (a.min(b), a.max(b));
        let base = FinitePmf::binomial(m, p).unwrap();
        let near = tv_distance(&base, &FinitePmf::binomial(m, pp).unwrap());
        let far = tv_distance(&base, &FinitePmf::binomial(m, 0.0).unwrap());
        prop_assert!(near <= far + 1e-12);
    }

    #[test]
    fn intervals_are_well_formed((m, s) in binomial_sample(), eps_max in 0.0f64..0.3) {
        let ci = robust_ci(&s, &RobustCiConfig::new(m, s.n(), 0.05, eps_max).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&ci.lower) && (0.0..=1.0).contains(&ci.upper));
        let pci = robust_ci_pois(&s, 0.05, eps_max).unwrap();
        prop_assert!(pci.lower >= 0.0 && pci.upper.is_finite());
    }

    #[test]
    fn robust_interval_mirrors_under_reflection((m, s) in binomial_sample(), eps_max in 0.0f64..0.3) {
        let cfg = RobustCiConfig::new(m, s.n(), 0.05, eps_max).unwrap();
        let ci = robust_ci(&s, &cfg).unwrap();
        let flipped = robust_ci(&s.reflect(m).unwrap(), &cfg).unwrap();
        prop_assert!((ci.lower - (1.0 - flipped.upper)).abs() <= 1e-12);
        prop_assert!((ci.upper - (1.0 - flipped.lower)).abs() <= 1e-12);
    }

    #[test]
    fn known_eps_interval_contains_estimate_and_mirrors(p in 0.0f64..=1.0, m in 1u64..50, n in 1usize..2000, e in 0.0f64..0.3) {
        let ci = known_eps_ci(p, m, n, e, 0.05, 3.0).unwrap();
        prop_assert!(ci.lower <= p && p <= ci.upper);
        let mirror = known_eps_ci(1.0 - p, m, n, e, 0.05, 3.0).unwrap();
        prop_assert!((ci.lower - (1.0 - mirror.upper)).abs() <= 1e-9);
    }

    #[test]
    fn wilson_roots_lie_on_the_boundary(center in 0.0f64..=1.0, a in 0.0f64..0.5, b in 0.0f64..0.2) {
        let (lo, hi) = wilson_type_bounds(center, a, b);
        let slack = |q: f64| a * (q * (1.0 - q)).sqrt() + b - (center - q).abs();
        prop_assert!(lo <= center && center <= hi);
        if lo > 0.0 { prop_assert!(slack(lo).abs() <= 1e-9); }
        if hi < 1.0 { prop_assert!(slack(hi).abs() <= 1e-9); }
    }

    #[test]
    fn bernoulli_interval_flips_with_labels(v in prop::collection::vec(0u64..=1, 1..60)) {
        let s = SampleSet::new(v).unwrap();
        let ci = bernoulli_ci(&s, 0.05, 4.0).unwrap();
        let flipped = bernoulli_ci(&s.reflect(1).unwrap(), 0.05, 4.0).unwrap();
        prop_assert!((ci.lower - (1.0 - flipped.upper)).abs() <= 1e-12);
    }

    #[test]
    fn empirical_cdf_is_monotone(s in count_sample(), a in -2.0f64..30.0, b in -2.0f64..30.0) {
        let (x, y) = (a.min(b), a.max(b));
        prop_assert!(empirical_cdf(&s, x) <= empirical_cdf(&s, y));
        let back = s.reflect(30).unwrap().reflect(30).unwrap();
        prop_assert_eq!(back.values(), s.values());
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn csv_rows_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let rows = vec![
        CsvRow {
            method: Method::BinomRobust,
            m: Some(5),
            n: 100,
            p: 0.1 + 0.2,
            eps: 0.05,
            eps_max: 0.1,
            alpha: 0.05,
            q_strategy: "custom:0:0.5,0.5".into(),
            reps: 10,
            seed: u64::MAX,
            coverage: 0.9,
            mean_length: 1.0 / 3.0,
            median_length: 0.25,
            mc_stderr: 1e-300,
            empty_count: 2,
            wallclock_s: 0.0,
        },
        CsvRow {
            method: Method::PoissonRobust,
            m: None,
            n: 7,
            p: 3.5,
            eps: 0.0,
            eps_max: 0.0,
            alpha: 0.1,
            q_strategy: "point:50".into(),
            reps: 1,
            seed: 0,
            coverage: 1.0,
            mean_length: 2.0,
            median_length: 2.0,
            mc_stderr: 0.0,
            empty_count: 0,
            wallclock_s: 0.0,
        },
    ];
    write_csv(&rows, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(read_csv(&path).unwrap(), rows);

    write_csv(&[], std::fs::File::create(&path).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(read_csv(&path).unwrap().is_empty());
}
