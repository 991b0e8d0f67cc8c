// SPDX-License-Identifier: Apache-2.0

//! Point estimators for binomial proportions under contamination and the two
//! simple intervals built on them.

use serde::{Deserialize, Serialize};

use crate::dist::binom_pmf_raw;
use crate::error::{check_range, config, domain, Result};
use crate::interval::{wilson_type_bounds, ConfidenceInterval, Method};
use crate::sample::SampleSet;

pub const DEFAULT_C_SEL: f64 = 5.0;
pub const DEFAULT_C_CI: f64 = 3.0;
pub const DEFAULT_BERNOULLI_C: f64 = 4.0;
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-3;
pub const GOLDEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub m: u64,
    pub alpha: f64,
    /// Boundary frequencies are compared against `exp(-1.5 c_sel)`.
    pub c_sel: f64,
    pub c_ci: f64,
    pub grid_resolution: f64,
}

impl EstimatorConfig {
    pub fn new(m: u64) -> Self {
        Self {
            m,
            alpha: 0.05,
            c_sel: DEFAULT_C_SEL,
            c_ci: DEFAULT_C_CI,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(config("m", "need at least one trial per observation"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if !(self.c_sel > 0.0) {
            return Err(config("c_sel", "must be positive"));
        }
        if !(self.c_ci > 0.0) {
            return Err(config("c_ci", "must be positive"));
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution <= 1.0) {
            return Err(config("grid_resolution", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn selection_threshold(&self) -> f64 {
        (-1.5 * self.c_sel).exp()
    }
}

fn frequency(s: &SampleSet, value: u64) -> f64 {
    s.count_eq(value) as f64 / s.n() as f64
}

/// `(1/(mn)) Σ X_i 1{X_i <= m}`.
pub fn trimmed_mean(s: &SampleSet, m: u64) -> f64 {
    let total: u64 = s.values().iter().filter(|&&x| x <= m).sum();
    total as f64 / (m as f64 * s.n() as f64)
}

/// Estimator tuned for small `p`: `1 - freq(0)^(1/m)`.
pub fn p_hat_s(s: &SampleSet, m: u64) -> f64 {
    1.0 - frequency(s, 0).powf(1.0 / m as f64)
}

/// Estimator tuned for large `p`: `freq(m)^(1/m)`.
pub fn p_hat_l(s: &SampleSet, m: u64) -> f64 {
    frequency(s, m).powf(1.0 / m as f64)
}

/// Empirical CDF at `0..=m`.
fn ecdf_table(s: &SampleSet, m: u64) -> Vec<f64> {
    let n = s.n() as f64;
    (0..=m).map(|t| s.count_le(t as i64) as f64 / n).collect()
}

/// Kolmogorov distance between the data and `Binomial(m, p)` at `t = 0..=m`
/// (at `t = -1` both CDFs vanish).
pub fn kolmogorov_distance(ecdf: &[f64], m: u64, p: f64) -> f64 {
    let mut cdf = 0.0;
    let mut worst: f64 = 0.0;
    for (t, f) in ecdf.iter().enumerate() {
        cdf += binom_pmf_raw(m, p, t as u64);
        worst = worst.max((f - cdf.min(1.0)).abs());
    }
    worst
}

/// Minimum Kolmogorov-distance estimate of `p`.
pub fn p_hat_g(s: &SampleSet, m: u64, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    let ecdf = ecdf_table(s, m);
    let obj = |p: f64| kolmogorov_distance(&ecdf, m, p);

    let steps = (1.0 / cfg.grid_resolution).ceil() as u64;
    let mut best = (0.0, obj(0.0));
    for i in 1..=steps {
        let p = i as f64 / steps as f64;
        let v = obj(p);
        if v < best.1 {
            best = (p, v);
        }
    }

    let h = 1.0 / steps as f64;
    let (mut a, mut b) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    while b - a > GOLDEN_TOL {
        // `<=` keeps the left bracket on ties, favoring smaller p.
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = obj(d);
        }
    }
    let refined = 0.5 * (a + b);
    let fr = obj(refined);
    if fr < best.1 || (fr == best.1 && refined < best.0) {
        Ok(refined)
    } else {
        Ok(best.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Small,
    Large,
    MinimumDistance,
}

/// Which estimator the selection rule picks for this sample.
pub fn selected_branch(s: &SampleSet, cfg: &EstimatorConfig) -> Branch {
    let thr = cfg.selection_threshold();
    let zeros = frequency(s, 0) >= thr;
    let tops = frequency(s, cfg.m) >= thr;
    match (zeros, tops) {
        (true, false) => Branch::Small,
        (false, true) => Branch::Large,
        _ => Branch::MinimumDistance,
    }
}

pub fn adaptive_estimator(s: &SampleSet, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    s.check_max(cfg.m)?;
    Ok(match selected_branch(s, cfg) {
        Branch::Small => p_hat_s(s, cfg.m),
        Branch::Large => p_hat_l(s, cfg.m),
        Branch::MinimumDistance => p_hat_g(s, cfg.m, cfg)?,
    })
}

/// `[1 - C(freq(0) + 1/n), C(freq(1) + 1/n)] ∩ [0, 1]` for 0/1 data.
pub fn bernoulli_ci(s: &SampleSet, alpha: f64, c: f64) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", alpha, "must lie in (0, 1)"));
    }
    if !(c > 0.0) {
        return Err(domain("C", c, "must be positive"));
    }
    s.check_max(1)?;
    let inv_n = 1.0 / s.n() as f64;
    let lower = (1.0 - c * (frequency(s, 0) + inv_n)).max(0.0);
    let upper = (c * (frequency(s, 1) + inv_n)).min(1.0);
    Ok(ConfidenceInterval::new(lower, upper, alpha, Method::Bernoulli))
}

/// The set `{q : |p̂ - q| <= C(A sqrt(q(1-q)) + B)}` with
/// `A = (1/sqrt(n) + eps)/sqrt(m)` and `B = (1/n + eps)/m`.
pub fn known_eps_ci(
    p_hat: f64,
    m: u64,
    n: usize,
    eps: f64,
    alpha: f64,
    c: f64,
) -> Result<ConfidenceInterval> {
    check_range("p_hat", p_hat, 0.0, 1.0)?;
    check_range("eps", eps, 0.0, 1.0)?;
    if m == 0 || n == 0 {
        return Err(domain("m*n", 0.0, "need m >= 1 and n >= 1"));
    }
    let (mf, nf) = (m as f64, n as f64);
    let a = (1.0 / nf.sqrt() + eps) / mf.sqrt();
    let b = (1.0 / nf + eps) / mf;
    let (lower, upper) = wilson_type_bounds(p_hat, c * a, c * b);
    Ok(ConfidenceInterval::new(lower, upper, alpha, Method::BinomKnownEps))
}
