// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use robust_ci::sim::{emit_csv, read_csv, run_experiment, ExperimentConfig, ExperimentRecord};
use robust_ci::Method;

fn config(method: Method, n: usize, reps: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n,
        replications: reps,
        seed,
        ..ExperimentConfig::new(method)
    }
}

/// Monte Carlo gate: nominal coverage minus three standard errors.
fn assert_covers(rec: &ExperimentRecord, nominal: f64) {
    let reps = rec.replicates.len() as f64;
    let gate = nominal - 3.0 * (nominal * (1.0 - nominal) / reps).sqrt();
    assert!(
        rec.coverage >= gate,
        "{:?}: coverage {} below {gate}",
        rec.config.method,
        rec.coverage
    );
}

fn golden_configs() -> Vec<ExperimentConfig> {
    let binom = ExperimentConfig {
        m: Some(10),
        p: Some(0.3),
        eps: 0.05,
        eps_max: 0.1,
        ..config(Method::BinomRobust, 200, 40, 11)
    };
    let known = ExperimentConfig {
        method: Method::BinomKnownEps,
        ..binom.clone()
    };
    let bern = ExperimentConfig {
        m: Some(1),
        p: Some(0.4),
        eps: 0.0,
        ..config(Method::Bernoulli, 200, 40, 12)
    };
    let pois = ExperimentConfig {
        lambda: Some(2.5),
        eps: 0.05,
        eps_max: 0.1,
        q_strategy: "point:30".into(),
        ..config(Method::PoissonRobust, 200, 40, 13)
    };
    let er = ExperimentConfig {
        p: Some(0.5),
        eps: 0.1,
        ..config(Method::ErConservative, 10, 20, 14)
    };
    vec![binom, known, bern, pois, er]
}

#[test]
fn golden_csv_is_reproduced() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden.csv");
    let mut records = Vec::new();
    for cfg in golden_configs() {
        let mut rec = run_experiment(&cfg).unwrap();
        rec.wallclock_s = 0.0;
        records.push(rec);
    }
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        emit_csv(&records, &golden).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let fresh = dir.path().join("fresh.csv");
    emit_csv(&records, &fresh).unwrap();
    assert_eq!(
        std::fs::read_to_string(&fresh).unwrap(),
        std::fs::read_to_string(&golden).unwrap()
    );
    assert_eq!(read_csv(&golden).unwrap().len(), 5);
}

#[test]
fn experiments_are_deterministic() {
    for cfg in golden_configs() {
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.replicates, b.replicates);
        assert_eq!(a.to_row().coverage, b.to_row().coverage);
    }
    let mut other = golden_configs()[0].clone();
    other.seed += 1;
    assert_ne!(
        run_experiment(&other).unwrap().replicates,
        run_experiment(&golden_configs()[0]).unwrap().replicates
    );
}

#[test]
fn degenerate_bernoulli_is_covered() {
    let cfg = ExperimentConfig {
        m: Some(1),
        p: Some(0.0),
        ..config(Method::BinomRobust, 500, 2000, 21)
    };
    assert_covers(&run_experiment(&cfg).unwrap(), 0.95);
}

#[test]
fn interval_widens_with_contamination() {
    let lengths: Vec<f64> = [0.0, 0.02, 0.1]
        .iter()
        .map(|&eps| {
            let cfg = ExperimentConfig {
                m: Some(20),
                p: Some(0.5),
                eps,
                eps_max: 0.1,
                ..config(Method::BinomRobust, 500, 400, 22)
            };
            run_experiment(&cfg).unwrap().median_length
        })
        .collect();
    assert!(lengths[0] <= lengths[1] && lengths[1] <= lengths[2], "{lengths:?}");
    assert!(lengths[0] < lengths[2]);
}

#[test]
fn poisson_covers_clean_rates() {
    for lambda in [0.0, 1.0, 10.0] {
        let cfg = ExperimentConfig {
            lambda: Some(lambda),
            eps_max: 0.05,
            ..config(Method::PoissonRobust, 500, 1000, 23)
        };
        assert_covers(&run_experiment(&cfg).unwrap(), 0.95);
    }
}

#[test]
fn adaptive_estimator_meets_its_rate() {
    // Selection constant 1 keeps the boundary branches off under 5% contamination at m.
    let cfg = ExperimentConfig {
        m: Some(20),
        p: Some(0.5),
        eps: 0.05,
        eps_max: 0.05,
        c_sel: 1.0,
        c_ci: 3.0,
        ..config(Method::BinomKnownEps, 500, 1000, 24)
    };
    let rec = run_experiment(&cfg).unwrap();
    assert_covers(&rec, 0.95);
    assert!(rec.estimates().iter().all(|p| (0.0..=1.0).contains(p)));
}

#[test]
fn er_interval_covers_clean_graphs() {
    let cfg = ExperimentConfig {
        p: Some(0.5),
        er_c: 3.0,
        ..config(Method::ErConservative, 12, 300, 25)
    };
    assert_covers(&run_experiment(&cfg).unwrap(), 0.95);
}
