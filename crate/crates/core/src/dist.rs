// SPDX-License-Identifier: Apache-2.0

//! Binomial and Poisson kernels, concentration bounds and total variation.
//!
//! Thresholds are real numbers: `P(X <= t)` means `P(X <= floor(t))` and the
//! survival function `P(X >= t)` means `P(X >= ceil(t))`.

use statrs::function::gamma::ln_gamma;

use crate::error::{check_range, domain, Result};

/// Allowed drift of a pmf's total mass away from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Poisson supports are cut at the first `K` with `P(X > K)` below this.
pub const POISSON_TAIL_MASS: f64 = 1e-14;

/// Relative size below which further tail terms are dropped from a sum.
const SUM_CUTOFF: f64 = 1e-18;

fn ln_choose(m: u64, k: u64) -> f64 {
    ln_gamma(m as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0)
}

/// Binomial pmf without argument checks. `k > m` yields 0.
pub(crate) fn binom_pmf_raw(m: u64, p: f64, k: u64) -> f64 {
    if k > m {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    // The two extreme terms have no binomial coefficient; direct powers keep
    // small cases such as Bernoulli pmfs exact.
    if m <= i32::MAX as u64 {
        if k == 0 {
            return (1.0 - p).powi(m as i32);
        }
        if k == m {
            return p.powi(m as i32);
        }
    }
    let ln = ln_choose(m, k) + k as f64 * p.ln() + (m - k) as f64 * (-p).ln_1p();
    ln.exp()
}

/// `P(X <= floor(t))` for `X ~ Binomial(m, p)`, no argument checks.
pub(crate) fn binom_cdf_raw(m: u64, p: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if t >= m as f64 {
        return 1.0;
    }
    let top = t.floor() as u64;
    let s: f64 = (0..=top).map(|k| binom_pmf_raw(m, p, k)).sum();
    s.min(1.0)
}

pub fn binom_pmf(m: u64, p: f64, k: i64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0)?;
    if k < 0 || k as u64 > m {
        return Err(domain("k", k as f64, "must lie in 0..=m"));
    }
    Ok(binom_pmf_raw(m, p, k as u64))
}

pub fn binom_cdf(m: u64, p: f64, t: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0)?;
    if t.is_nan() {
        return Err(domain("t", t, "threshold is NaN"));
    }
    Ok(binom_cdf_raw(m, p, t))
}

/// `P(X >= ceil(t))` for `X ~ Binomial(m, p)`.
pub fn binom_sf(m: u64, p: f64, t: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0)?;
    if t.is_nan() {
        return Err(domain("t", t, "threshold is NaN"));
    }
    let start = t.ceil();
    if start <= 0.0 {
        return Ok(1.0);
    }
    if start > m as f64 {
        return Ok(0.0);
    }
    let s: f64 = (start as u64..=m).map(|k| binom_pmf_raw(m, p, k)).sum();
    Ok(s.min(1.0))
}

pub(crate) fn pois_pmf_raw(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * lambda.ln() - lambda - ln_gamma(kf + 1.0)).exp()
}

/// Sum of pmf terms from `k` downwards; terms shrink when `k <= lambda`.
fn pois_sum_down(lambda: f64, k: u64) -> f64 {
    let mut acc = 0.0;
    let mut j = k;
    loop {
        let term = pois_pmf_raw(lambda, j);
        acc += term;
        if j == 0 || (term < SUM_CUTOFF * acc && (j as f64) < lambda) {
            return acc;
        }
        j -= 1;
    }
}

/// Sum of pmf terms from `k` upwards; terms shrink when `k >= lambda`.
fn pois_sum_up(lambda: f64, k: u64) -> f64 {
    let mut acc = 0.0;
    let mut j = k;
    loop {
        let term = pois_pmf_raw(lambda, j);
        acc += term;
        if (j as f64) > lambda && (term < SUM_CUTOFF * acc || term == 0.0) {
            return acc;
        }
        j += 1;
    }
}

pub(crate) fn pois_cdf_raw(lambda: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return 1.0;
    }
    if lambda.is_infinite() {
        return 0.0;
    }
    let k = t.floor() as u64;
    if (k as f64) < lambda {
        pois_sum_down(lambda, k).min(1.0)
    } else {
        (1.0 - pois_sum_up(lambda, k + 1)).max(0.0)
    }
}

pub(crate) fn pois_sf_raw(lambda: f64, t: f64) -> f64 {
    let start = t.ceil();
    if start <= 0.0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 0.0;
    }
    if lambda.is_infinite() {
        return 1.0;
    }
    let k = start as u64;
    if (k as f64) > lambda {
        pois_sum_up(lambda, k).min(1.0)
    } else {
        (1.0 - pois_sum_down(lambda, k - 1)).max(0.0)
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain("lambda", lambda, "rate must be finite and nonnegative"))
    }
}

pub fn pois_pmf(lambda: f64, k: u64) -> Result<f64> {
    check_rate(lambda)?;
    Ok(pois_pmf_raw(lambda, k))
}

pub fn pois_cdf(lambda: f64, t: f64) -> Result<f64> {
    check_rate(lambda)?;
    Ok(pois_cdf_raw(lambda, t))
}

pub fn pois_sf(lambda: f64, t: f64) -> Result<f64> {
    check_rate(lambda)?;
    Ok(pois_sf_raw(lambda, t))
}

/// Smallest `K` with `P(X > K) < POISSON_TAIL_MASS`.
pub fn pois_support_max(lambda: f64) -> Result<u64> {
    check_rate(lambda)?;
    let mut k = lambda.floor() as u64;
    while pois_sf_raw(lambda, (k + 1) as f64) >= POISSON_TAIL_MASS {
        k += 1 + (lambda.sqrt() / 4.0) as u64;
    }
    // Step back to the smallest qualifying K.
    while k > 0 && pois_sf_raw(lambda, k as f64) < POISSON_TAIL_MASS {
        k -= 1;
    }
    Ok(k)
}

/// DKW band half-width `sqrt(log(2/alpha) / (2n))`.
pub fn dkw_halfwidth(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", 0.0, "need at least one observation"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", alpha, "must lie in (0, 1)"));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// Bernstein deviation threshold `n p (1-p) / C + C log(2/alpha)`.
pub fn bernstein_dev(n: usize, p: f64, alpha: f64, c: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", alpha, "must lie in (0, 1)"));
    }
    if !(c >= 4.0 / 3.0) {
        return Err(domain("C", c, "slack constant must be at least 4/3"));
    }
    Ok(n as f64 * p * (1.0 - p) / c + c * (2.0 / alpha).ln())
}

/// A distribution on the integers `support_min ..= support_min + probs.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePmf {
    support_min: u64,
    probs: Vec<f64>,
}

impl FinitePmf {
    pub fn new(support_min: u64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(domain("probs", 0.0, "pmf needs at least one support point"));
        }
        if let Some(&bad) = probs.iter().find(|v| !(**v >= 0.0)) {
            return Err(domain("probs", bad, "entries must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain("probs", total, "entries must sum to one"));
        }
        Ok(Self { support_min, probs })
    }

    /// Builds from nonnegative weights, dividing by their total.
    pub fn from_weights(support_min: u64, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(domain("weights", total, "need nonnegative weights with positive total"));
        }
        Self::new(support_min, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn point_mass(k: u64) -> Self {
        Self {
            support_min: k,
            probs: vec![1.0],
        }
    }

    pub fn binomial(m: u64, p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0)?;
        let probs = (0..=m).map(|k| binom_pmf_raw(m, p, k)).collect();
        Ok(Self {
            support_min: 0,
            probs,
        })
    }

    /// Poisson pmf on `0..=pois_support_max(lambda)`, not renormalized.
    pub fn poisson(lambda: f64) -> Result<Self> {
        let top = pois_support_max(lambda)?;
        Ok(Self::poisson_on(lambda, top))
    }

    /// Poisson pmf restricted to `0..=top`, not renormalized.
    pub(crate) fn poisson_on(lambda: f64, top: u64) -> Self {
        Self {
            support_min: 0,
            probs: (0..=top).map(|k| pois_pmf_raw(lambda, k)).collect(),
        }
    }

    pub fn support_min(&self) -> u64 {
        self.support_min
    }

    pub fn support_max(&self) -> u64 {
        self.support_min + self.probs.len() as u64 - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k < self.support_min {
            return 0.0;
        }
        self.probs
            .get((k - self.support_min) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (self.support_min + i as u64) as f64 * p)
            .sum()
    }

    /// `(1 - eps) * self + eps * q`.
    pub fn mix(&self, eps: f64, q: &FinitePmf) -> Result<Self> {
        check_range("eps", eps, 0.0, 1.0)?;
        let lo = self.support_min.min(q.support_min);
        let hi = self.support_max().max(q.support_max());
        let probs = (lo..=hi)
            .map(|k| (1.0 - eps) * self.prob(k) + eps * q.prob(k))
            .collect();
        Ok(Self {
            support_min: lo,
            probs,
        })
    }
}

/// Half the l1 distance between two pmfs on the union of their supports.
pub fn tv_distance(a: &FinitePmf, b: &FinitePmf) -> f64 {
    let lo = a.support_min.min(b.support_min);
    let hi = a.support_max().max(b.support_max());
    let l1: f64 = (lo..=hi).map(|k| (a.prob(k) - b.prob(k)).abs()).sum();
    (0.5 * l1).min(1.0)
}
