// SPDX-License-Identifier: Apache-2.0

//! Robust confidence intervals for a Poisson rate. The construction mirrors
//! the binomial one with the integer grid `0, 1, ..., λ̂_max` in place of
//! `{k/m}`; the data-driven cap `λ̂_max` keeps the search finite.

use crate::binomial::THRESHOLD_SLACK;
use crate::dist::{pois_cdf_raw, pois_sf_raw};
use crate::error::{check_range, config, domain, Result};
use crate::grid::{
    check_alpha, log24, log_inv_scale, smallness_warning, EpsilonGrid, DEFAULT_WARN_THRESHOLD,
};
use crate::interval::{CiWarning, ConfidenceInterval, Method};
use crate::sample::SampleSet;

pub const DEFAULT_GRID_CAP: u64 = 1_000_000;

/// Grid tests below this rate are tabulated when an interval engine is built.
const TABULATED_RATES: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoisTestQuantities {
    pub t: f64,
    pub r: f64,
    pub tau: f64,
}

fn check_common(lambda: f64, eps: f64, n: usize, alpha: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(domain("lambda", lambda, "rate must be finite and nonnegative"));
    }
    check_range("eps", eps, 0.0, 1.0)?;
    check_alpha(alpha)?;
    if n == 0 {
        return Err(domain("n", 0.0, "need at least one observation"));
    }
    Ok(())
}

fn half_gap(lambda: f64, eps: f64, n: usize, alpha: f64) -> f64 {
    (lambda / 2.0).min((lambda * log_inv_scale(eps, n, alpha)).sqrt() / 8.0)
}

fn upper_raw(lambda: f64, eps: f64, n: usize, alpha: f64) -> PoisTestQuantities {
    let t = lambda - half_gap(lambda, eps, n, alpha);
    let r = if lambda == 0.0 {
        0.5
    } else {
        lambda / (4.0 * (lambda - t))
    };
    let tau = 1.1 * pois_cdf_raw(lambda + r, (t + THRESHOLD_SLACK).floor());
    PoisTestQuantities { t, r, tau }
}

fn lower_raw(lambda: f64, eps: f64, n: usize, alpha: f64) -> PoisTestQuantities {
    if lambda < 1.0 {
        return PoisTestQuantities {
            t: 1.0,
            r: (1.0 - 1.0 / (6.0 * std::f64::consts::E)) * lambda,
            tau: 0.5 * (1.0 - (-lambda).exp()) - 3.0 * log24(alpha) / n as f64,
        };
    }
    let t = lambda + half_gap(lambda, eps, n, alpha);
    let r = lambda / (4.0 * (t - lambda));
    // A rate below zero is read as the point mass at zero.
    let alt = (lambda - r).max(0.0);
    let tau = 1.1 * pois_sf_raw(alt, (t - THRESHOLD_SLACK).ceil());
    PoisTestQuantities { t, r, tau }
}

pub fn upper_quantities_pois(
    lambda: f64,
    eps: f64,
    n: usize,
    alpha: f64,
) -> Result<PoisTestQuantities> {
    check_common(lambda, eps, n, alpha)?;
    Ok(upper_raw(lambda, eps, n, alpha))
}

pub fn lower_quantities_pois(
    lambda: f64,
    eps: f64,
    n: usize,
    alpha: f64,
) -> Result<PoisTestQuantities> {
    check_common(lambda, eps, n, alpha)?;
    Ok(lower_raw(lambda, eps, n, alpha))
}

/// A test of the form `#{X in region} / n < tau`, the region being
/// `X <= count` for the upper test and `X >= count` for the lower one.
#[derive(Debug, Clone, Copy)]
struct CountTest {
    count: i64,
    tau: f64,
}

impl CountTest {
    fn plus(lambda: f64, eps: f64, n: usize, alpha: f64) -> Self {
        let q = upper_raw(lambda, eps, n, alpha);
        Self {
            count: (q.t + THRESHOLD_SLACK).floor() as i64,
            tau: q.tau,
        }
    }

    fn minus(lambda: f64, eps: f64, n: usize, alpha: f64) -> Self {
        let q = lower_raw(lambda, eps, n, alpha);
        Self {
            count: (q.t - THRESHOLD_SLACK).ceil() as i64,
            tau: q.tau,
        }
    }

    fn rejects_below(&self, s: &SampleSet) -> bool {
        (s.count_le(self.count) as f64 / s.n() as f64) < self.tau
    }

    fn rejects_above(&self, s: &SampleSet) -> bool {
        (s.count_ge(self.count) as f64 / s.n() as f64) < self.tau
    }
}

/// `φ⁺_{λ,eps}`; `true` means the test rejects.
pub fn phi_plus_pois(s: &SampleSet, lambda: f64, eps: f64, n: usize, alpha: f64) -> Result<bool> {
    check_common(lambda, eps, n, alpha)?;
    Ok(CountTest::plus(lambda, eps, n, alpha).rejects_below(s))
}

/// `φ⁻_{λ,eps}`; `true` means the test rejects.
pub fn phi_minus_pois(s: &SampleSet, lambda: f64, eps: f64, n: usize, alpha: f64) -> Result<bool> {
    check_common(lambda, eps, n, alpha)?;
    Ok(CountTest::minus(lambda, eps, n, alpha).rejects_above(s))
}

/// `X_(⌈3n/4⌉) + 1`.
pub fn lambda_max_hat(s: &SampleSet) -> u64 {
    let k = (3 * s.n()).div_ceil(4);
    s.sorted()[k - 1] + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonCiConfig {
    pub n: usize,
    pub alpha: f64,
    pub eps_max: f64,
    /// Hard limit on `λ̂_max`.
    pub grid_cap: u64,
    pub warn_threshold: f64,
}

impl PoissonCiConfig {
    pub fn new(n: usize, alpha: f64, eps_max: f64) -> Result<Self> {
        let cfg = Self {
            n,
            alpha,
            eps_max,
            grid_cap: DEFAULT_GRID_CAP,
            warn_threshold: DEFAULT_WARN_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(config("n", "need at least one observation"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if !(self.eps_max >= 0.0 && self.eps_max <= 1.0) {
            return Err(config("eps_max", format!("{} is not in [0, 1]", self.eps_max)));
        }
        if self.grid_cap == 0 {
            return Err(config("grid_cap", "must be positive"));
        }
        Ok(())
    }

    /// `λ̂_max` clipped to the grid cap.
    pub fn rate_cap(&self, s: &SampleSet) -> u64 {
        lambda_max_hat(s).min(self.grid_cap)
    }
}

/// Discretized monotone upper test `ψ̂⁺_{λ,eps}`; `true` means reject.
pub fn psi_hat_plus_pois(
    s: &SampleSet,
    lambda: f64,
    eps: f64,
    cfg: &PoissonCiConfig,
) -> Result<bool> {
    let cap = cfg.rate_cap(s);
    check_common(lambda, eps, cfg.n, cfg.alpha)?;
    check_range("lambda", lambda, 0.0, cap as f64)?;
    if lambda == cap as f64 {
        return Ok(false);
    }
    let top = (lambda - THRESHOLD_SLACK).ceil().max(0.0) as u64;
    Ok((0..=top).all(|mu| CountTest::plus(mu as f64, eps, cfg.n, cfg.alpha).rejects_below(s)))
}

/// Discretized monotone lower test `ψ̂⁻_{λ,eps}`; `true` means reject.
pub fn psi_hat_minus_pois(
    s: &SampleSet,
    lambda: f64,
    eps: f64,
    cfg: &PoissonCiConfig,
) -> Result<bool> {
    let cap = cfg.rate_cap(s);
    check_common(lambda, eps, cfg.n, cfg.alpha)?;
    check_range("lambda", lambda, 0.0, cap as f64)?;
    let grid_rejects =
        |mu: u64| CountTest::minus(mu as f64, eps, cfg.n, cfg.alpha).rejects_above(s);
    if lambda < 1.0 {
        Ok(CountTest::minus(lambda, eps, cfg.n, cfg.alpha).rejects_above(s)
            && (1..=cap).all(grid_rejects))
    } else {
        let bottom = (lambda + THRESHOLD_SLACK).floor() as u64;
        Ok((bottom..=cap).all(grid_rejects))
    }
}

/// Closed-form inversion of `φ⁻` over the bottom cell `[0, 1)`.
pub fn boundary_right_pois(s: &SampleSet, alpha: f64) -> f64 {
    let n = s.n() as f64;
    let above = s.count_ge(1) as f64 / n;
    let inner = (2.0 * above + 6.0 * log24(alpha) / n).min(1.0 - (-1.0f64).exp());
    -(1.0 - inner).ln()
}

/// Interval engine for a fixed `(n, alpha, eps_max)`.
#[derive(Debug, Clone)]
pub struct PoissonRobustCi {
    cfg: PoissonCiConfig,
    grid: EpsilonGrid,
    plus: Vec<Vec<CountTest>>,
    minus: Vec<Vec<CountTest>>,
    warnings: Vec<CiWarning>,
}

impl PoissonRobustCi {
    pub fn new(cfg: PoissonCiConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = EpsilonGrid::for_interval(cfg.n, cfg.alpha, cfg.eps_max)?;
        let table = |make: fn(f64, f64, usize, f64) -> CountTest| -> Vec<Vec<CountTest>> {
            grid.values()
                .iter()
                .map(|&eps| {
                    (0..TABULATED_RATES)
                        .map(|mu| make(mu as f64, eps, cfg.n, cfg.alpha))
                        .collect()
                })
                .collect()
        };
        let plus = table(CountTest::plus);
        let minus = table(CountTest::minus);
        let warnings = smallness_warning(cfg.n, cfg.alpha, cfg.eps_max, cfg.warn_threshold)
            .into_iter()
            .collect();
        Ok(Self {
            cfg,
            grid,
            plus,
            minus,
            warnings,
        })
    }

    pub fn config(&self) -> &PoissonCiConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &EpsilonGrid {
        &self.grid
    }

    fn plus_test(&self, e: usize, mu: u64) -> CountTest {
        match self.plus[e].get(mu as usize) {
            Some(t) => *t,
            None => CountTest::plus(mu as f64, self.grid.values()[e], self.cfg.n, self.cfg.alpha),
        }
    }

    fn minus_test(&self, e: usize, mu: u64) -> CountTest {
        match self.minus[e].get(mu as usize) {
            Some(t) => *t,
            None => CountTest::minus(mu as f64, self.grid.values()[e], self.cfg.n, self.cfg.alpha),
        }
    }

    fn left(&self, s: &SampleSet, cap: u64) -> f64 {
        let mut worst = 0;
        for e in 0..self.grid.len() {
            match (0..=cap).find(|&mu| !self.plus_test(e, mu).rejects_below(s)) {
                Some(mu) => worst = worst.max(mu),
                None => return cap as f64,
            }
        }
        worst.saturating_sub(1) as f64
    }

    fn right(&self, s: &SampleSet, cap: u64) -> f64 {
        let mut worst = cap;
        for e in 0..self.grid.len() {
            match (1..=cap).rev().find(|&mu| !self.minus_test(e, mu).rejects_above(s)) {
                Some(mu) => worst = worst.min(mu),
                None => return boundary_right_pois(s, self.cfg.alpha),
            }
        }
        (worst + 1).min(cap) as f64
    }

    pub fn interval(&self, s: &SampleSet) -> Result<ConfidenceInterval> {
        if s.n() != self.cfg.n {
            return Err(config(
                "n",
                format!("configured for {} observations, got {}", self.cfg.n, s.n()),
            ));
        }
        let requested = lambda_max_hat(s);
        let cap = requested.min(self.cfg.grid_cap);
        let mut ci = ConfidenceInterval::new(
            self.left(s, cap),
            self.right(s, cap),
            self.cfg.alpha,
            Method::PoissonRobust,
        );
        ci.warnings = self.warnings.clone();
        if requested > cap {
            log::warn!("rate grid capped at {cap} (data suggest {requested})");
            ci.warnings.push(CiWarning::RateGridCapped {
                requested,
                cap: self.cfg.grid_cap,
            });
        }
        Ok(ci)
    }
}

/// Robust interval for the rate with default grid cap and warning threshold.
pub fn robust_ci_pois(s: &SampleSet, alpha: f64, eps_max: f64) -> Result<ConfidenceInterval> {
    let cfg = PoissonCiConfig::new(s.n(), alpha, eps_max)?;
    PoissonRobustCi::new(cfg)?.interval(s)
}

/// Reference length curve `(sqrt(λ)(1/sqrt(log n) + 1/sqrt(log(1/eps))) + 1) ∧ λ + 1/n + eps`.
pub fn rate_ell_pois(lambda: f64, eps: f64, n: usize) -> Result<f64> {
    check_common(lambda, eps, n, 0.5)?;
    let isl = |x: f64| {
        let l = x.ln();
        if l > 0.0 {
            1.0 / l.sqrt()
        } else {
            f64::INFINITY
        }
    };
    let spread = if lambda == 0.0 {
        0.0
    } else {
        let eps_term = if eps == 0.0 { 0.0 } else { isl(1.0 / eps) };
        lambda.sqrt() * (isl(n as f64) + eps_term)
    };
    Ok((spread + 1.0).min(lambda) + 1.0 / n as f64 + eps)
}
