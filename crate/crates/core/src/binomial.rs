// SPDX-License-Identifier: Apache-2.0

//! Robust confidence intervals for `Binomial(m, p)` data under Huber
//! contamination, obtained by inverting a family of one-sided tests.
//!
//! For a candidate `p` and contamination level `eps` the upper test `φ⁺`
//! rejects when too few observations fall at or below `m t̄(p, eps)`; the
//! lower test `φ⁻` is its mirror image under `X ↦ m − X`, `p ↦ 1 − p`. The
//! interval keeps every `p` that survives the monotonized, grid-discretized
//! versions of both tests at every level of the contamination grid.

use crate::dist::binom_cdf_raw;
use crate::error::{check_range, config, domain, Result};
use crate::grid::{log24, log_inv_scale, smallness_warning, EpsilonGrid, DEFAULT_WARN_THRESHOLD};
use crate::interval::{CiWarning, ConfidenceInterval, Method};
use crate::sample::SampleSet;

/// Added before flooring `m·t` so that products landing a rounding error
/// below an integer still count that integer.
pub const THRESHOLD_SLACK: f64 = 1e-9;

/// Threshold `t`, separation `r` and level `tau` of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestQuantities {
    pub t: f64,
    pub r: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustCiConfig {
    pub m: u64,
    pub n: usize,
    pub alpha: f64,
    pub eps_max: f64,
    pub warn_threshold: f64,
}

impl RobustCiConfig {
    pub fn new(m: u64, n: usize, alpha: f64, eps_max: f64) -> Result<Self> {
        let cfg = Self {
            m,
            n,
            alpha,
            eps_max,
            warn_threshold: DEFAULT_WARN_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_warn_threshold(mut self, threshold: f64) -> Self {
        self.warn_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(config("m", "need at least one trial per observation"));
        }
        if self.n == 0 {
            return Err(config("n", "need at least one observation"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if !(self.eps_max >= 0.0 && self.eps_max <= 1.0) {
            return Err(config("eps_max", format!("{} is not in [0, 1]", self.eps_max)));
        }
        Ok(())
    }

    fn mf(&self) -> f64 {
        self.m as f64
    }
}

/// `p <= 1 - 1/m`, tolerant to the rounding in `k as f64 / m as f64`.
fn is_interior(p: f64, m: u64) -> bool {
    p * m as f64 <= (m - 1) as f64 + 1e-12
}

fn floor_count(m: u64, t: f64) -> i64 {
    (m as f64 * t + THRESHOLD_SLACK).floor() as i64
}

/// Upper quantities for `p <= 1 - 1/m`.
fn interior_upper(p: f64, cfg: &RobustCiConfig, eps: f64) -> TestQuantities {
    let m = cfg.mf();
    let v = p * (1.0 - p);
    let log_inv = log_inv_scale(eps, cfg.n, cfg.alpha);
    let t = p - (v / 2.0).min((v * log_inv / m).sqrt() / 8.0);
    let r = if p == 0.0 {
        1.0 / (2.0 * m)
    } else {
        v / (4.0 * m * (p - t))
    };
    // Past p + r = 1 the alternative is Binomial(m, 1), which puts no mass at
    // or below m t < m.
    let alt = (p + r).min(1.0);
    let tau = 1.1 * binom_cdf_raw(cfg.m, alt, floor_count(cfg.m, t) as f64);
    TestQuantities { t, r, tau }
}

/// Upper quantities on the top cell `p > 1 - 1/m`; `eps` plays no role.
fn top_cell_upper(p: f64, cfg: &RobustCiConfig) -> TestQuantities {
    let m = cfg.mf();
    TestQuantities {
        t: (m - 1.0) / m,
        r: (1.0 - 1.0 / (6.0 * std::f64::consts::E)) * (1.0 - p),
        tau: 0.5 * (1.0 - p.powf(m)) - 3.0 * log24(cfg.alpha) / cfg.n as f64,
    }
}

fn upper_raw(p: f64, eps: f64, cfg: &RobustCiConfig) -> TestQuantities {
    if is_interior(p, cfg.m) {
        interior_upper(p, cfg, eps)
    } else {
        top_cell_upper(p, cfg)
    }
}

/// `φ⁺` rejects iff `#{X <= count} / n < tau`.
#[derive(Debug, Clone, Copy)]
struct UpperTest {
    count: i64,
    tau: f64,
}

impl UpperTest {
    fn at(p: f64, eps: f64, cfg: &RobustCiConfig) -> Self {
        if is_interior(p, cfg.m) {
            let q = interior_upper(p, cfg, eps);
            Self {
                count: floor_count(cfg.m, q.t),
                tau: q.tau,
            }
        } else {
            Self {
                count: cfg.m as i64 - 1,
                tau: top_cell_upper(p, cfg).tau,
            }
        }
    }

    fn rejects_below(&self, s: &SampleSet) -> bool {
        (s.count_le(self.count) as f64 / s.n() as f64) < self.tau
    }

    /// The mirrored test: `#{X >= m - count} / n < tau`.
    fn rejects_above(&self, s: &SampleSet, m: u64) -> bool {
        (s.count_ge(m as i64 - self.count) as f64 / s.n() as f64) < self.tau
    }
}

fn check_eps(eps: f64, cfg: &RobustCiConfig) -> Result<()> {
    cfg.validate()?;
    check_range("eps", eps, 0.0, cfg.eps_max)
}

/// `(t̄, r̄, τ̄)` at `(p, eps)`.
pub fn upper_quantities(p: f64, eps: f64, cfg: &RobustCiConfig) -> Result<TestQuantities> {
    check_range("p", p, 0.0, 1.0)?;
    check_eps(eps, cfg)?;
    Ok(upper_raw(p, eps, cfg))
}

/// `(t̲, r̲, τ̲)` at `(p, eps)`, defined by reflecting the upper quantities.
pub fn lower_quantities(p: f64, eps: f64, cfg: &RobustCiConfig) -> Result<TestQuantities> {
    let up = upper_quantities(1.0 - p, eps, cfg)?;
    Ok(TestQuantities {
        t: 1.0 - up.t,
        ..up
    })
}

/// `r̄ = 1/(2m) ∨ 2 sqrt(p(1-p) / (m log(1/A)))`, valid for `p <= 1 - 1/m`.
pub fn rbar_closed_form(p: f64, eps: f64, cfg: &RobustCiConfig) -> Result<f64> {
    check_range("p", p, 0.0, 1.0)?;
    check_eps(eps, cfg)?;
    if !is_interior(p, cfg.m) {
        return Err(domain("p", p, "closed form only holds for p <= 1 - 1/m"));
    }
    let m = cfg.mf();
    if p == 0.0 {
        return Ok(1.0 / (2.0 * m));
    }
    let log_inv = log_inv_scale(eps, cfg.n, cfg.alpha);
    Ok((1.0 / (2.0 * m)).max(2.0 * (p * (1.0 - p) / (m * log_inv)).sqrt()))
}

fn inv_sqrt_log(x: f64) -> f64 {
    let l = x.ln();
    if l > 0.0 {
        1.0 / l.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Reference length curve `ℓ(n, eps, m, p)`.
pub fn rate_ell(p: f64, eps: f64, cfg: &RobustCiConfig) -> Result<f64> {
    check_range("p", p, 0.0, 1.0)?;
    check_range("eps", eps, 0.0, 1.0)?;
    cfg.validate()?;
    let m = cfg.mf();
    let n = cfg.n as f64;
    let v = p * (1.0 - p);
    let spread = if v == 0.0 {
        0.0
    } else {
        let eps_term = if eps == 0.0 { 0.0 } else { inv_sqrt_log(1.0 / eps) };
        (v / m).sqrt() * (inv_sqrt_log(n) + eps_term)
    };
    Ok((spread + 1.0 / m).min(p).min(1.0 - p) + (1.0 / n + eps) / m)
}

pub fn epsilon_grid(cfg: &RobustCiConfig) -> Result<EpsilonGrid> {
    EpsilonGrid::new(cfg.n, cfg.alpha, cfg.eps_max)
}

/// `φ⁺_{q,eps}`; `true` means the test rejects.
pub fn phi_plus(s: &SampleSet, q: f64, eps: f64, cfg: &RobustCiConfig) -> Result<bool> {
    check_range("q", q, 0.0, 1.0)?;
    check_eps(eps, cfg)?;
    Ok(UpperTest::at(q, eps, cfg).rejects_below(s))
}

/// `φ⁻_{q,eps}`; `true` means the test rejects.
pub fn phi_minus(s: &SampleSet, q: f64, eps: f64, cfg: &RobustCiConfig) -> Result<bool> {
    check_range("q", q, 0.0, 1.0)?;
    check_eps(eps, cfg)?;
    Ok(UpperTest::at(1.0 - q, eps, cfg).rejects_above(s, cfg.m))
}

fn grid_point(k: u64, m: u64) -> f64 {
    k as f64 / m as f64
}

/// Discretized monotone upper test `ψ̂⁺_{p,eps}`; `true` means reject.
pub fn psi_hat_plus(s: &SampleSet, p: f64, eps: f64, cfg: &RobustCiConfig) -> Result<bool> {
    check_range("p", p, 0.0, 1.0)?;
    check_eps(eps, cfg)?;
    let m = cfg.m;
    let grid_rejects = |k: u64| UpperTest::at(grid_point(k, m), eps, cfg).rejects_below(s);
    if is_interior(p, m) {
        let top = ((m as f64 * p - THRESHOLD_SLACK).ceil().max(0.0) as u64).min(m - 1);
        Ok((0..=top).all(grid_rejects))
    } else {
        Ok(UpperTest::at(p, eps, cfg).rejects_below(s) && (0..m).all(grid_rejects))
    }
}

/// Discretized monotone lower test `ψ̂⁻_{p,eps}`; `true` means reject.
pub fn psi_hat_minus(s: &SampleSet, p: f64, eps: f64, cfg: &RobustCiConfig) -> Result<bool> {
    check_range("p", p, 0.0, 1.0)?;
    check_eps(eps, cfg)?;
    let m = cfg.m;
    let grid_rejects = |k: u64| UpperTest::at(grid_point(m - k, m), eps, cfg).rejects_above(s, m);
    if (m as f64) * p < 1.0 - 1e-12 {
        Ok(UpperTest::at(1.0 - p, eps, cfg).rejects_above(s, m) && (1..=m).all(grid_rejects))
    } else {
        let bottom = (m as f64 * p + THRESHOLD_SLACK).floor() as u64;
        Ok((bottom.max(1)..=m).all(grid_rejects))
    }
}

/// Closed-form inversion of `φ⁺` over the top cell `[1 - 1/m, 1]`.
pub fn boundary_left(s: &SampleSet, cfg: &RobustCiConfig) -> f64 {
    let m = cfg.mf();
    let n = s.n() as f64;
    let below = s.count_le(cfg.m as i64 - 1) as f64 / n;
    let inner = (2.0 * below + 6.0 * log24(cfg.alpha) / n).min(1.0);
    (1.0 - inner).powf(1.0 / m).max((m - 1.0) / m)
}

/// Closed-form inversion of `φ⁻` over the bottom cell `[0, 1/m]`.
pub fn boundary_right(s: &SampleSet, cfg: &RobustCiConfig) -> f64 {
    let m = cfg.mf();
    let n = s.n() as f64;
    let above = s.count_ge(1) as f64 / n;
    let inner = (2.0 * above + 6.0 * log24(cfg.alpha) / n).min(1.0);
    (1.0 - (1.0 - inner).powf(1.0 / m)).min(1.0 / m)
}

/// Precomputed grid tests for one configuration. Building this once and
/// reusing it across datasets is what makes Monte Carlo runs cheap.
#[derive(Debug, Clone)]
pub struct BinomialRobustCi {
    cfg: RobustCiConfig,
    grid: EpsilonGrid,
    /// `tests[e][k]` is `φ⁺` at `q = k/m`, `k < m`, for the `e`-th grid level.
    tests: Vec<Vec<UpperTest>>,
    warnings: Vec<CiWarning>,
}

impl BinomialRobustCi {
    pub fn new(cfg: RobustCiConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = EpsilonGrid::for_interval(cfg.n, cfg.alpha, cfg.eps_max)?;
        let tests = grid
            .values()
            .iter()
            .map(|&eps| {
                (0..cfg.m)
                    .map(|k| UpperTest::at(grid_point(k, cfg.m), eps, &cfg))
                    .collect()
            })
            .collect();
        let warnings = smallness_warning(cfg.n, cfg.alpha, cfg.eps_max, cfg.warn_threshold)
            .into_iter()
            .collect();
        Ok(Self {
            cfg,
            grid,
            tests,
            warnings,
        })
    }

    pub fn config(&self) -> &RobustCiConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &EpsilonGrid {
        &self.grid
    }

    pub fn warnings(&self) -> &[CiWarning] {
        &self.warnings
    }

    /// Largest over levels of the first accepted grid index, scanning with
    /// `accepts`; `None` if some level accepts nowhere on the grid.
    fn worst_first_accept(&self, accepts: impl Fn(&UpperTest) -> bool) -> Option<u64> {
        let mut worst = 0;
        for row in &self.tests {
            let k = row.iter().position(&accepts)?;
            worst = worst.max(k as u64);
        }
        Some(worst)
    }

    pub fn left(&self, s: &SampleSet) -> f64 {
        match self.worst_first_accept(|t| !t.rejects_below(s)) {
            Some(k) => grid_point(k.saturating_sub(1), self.cfg.m),
            None => boundary_left(s, &self.cfg),
        }
    }

    pub fn right(&self, s: &SampleSet) -> f64 {
        // Index j of the mirrored test corresponds to q = (m - j)/m.
        let m = self.cfg.m;
        match self.worst_first_accept(|t| !t.rejects_above(s, m)) {
            Some(j) => grid_point(m - j.saturating_sub(1), m),
            None => boundary_right(s, &self.cfg),
        }
    }

    pub fn interval(&self, s: &SampleSet) -> Result<ConfidenceInterval> {
        if s.n() != self.cfg.n {
            return Err(config(
                "n",
                format!("configured for {} observations, got {}", self.cfg.n, s.n()),
            ));
        }
        s.check_max(self.cfg.m)?;
        let mut ci = ConfidenceInterval::new(
            self.left(s),
            self.right(s),
            self.cfg.alpha,
            Method::BinomRobust,
        );
        ci.warnings = self.warnings.clone();
        Ok(ci)
    }
}

/// Robust interval for `p`; `lower > upper` signals the empty set.
pub fn robust_ci(s: &SampleSet, cfg: &RobustCiConfig) -> Result<ConfidenceInterval> {
    BinomialRobustCi::new(cfg.clone())?.interval(s)
}
