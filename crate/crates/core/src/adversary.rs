// SPDX-License-Identifier: Apache-2.0

//! Least-favorable contaminations: pmfs `Q` for which a contaminated clean
//! distribution coincides with (or is very close to) a different clean one,
//! so that no procedure can tell the two parameters apart.

use std::fmt;

use crate::dist::{binom_pmf_raw, binom_sf, pois_pmf_raw, pois_support_max, tv_distance, FinitePmf};
use crate::error::{check_range, domain, Result};

/// Entries above `-NEGATIVE_TOL` are rounding noise and get clamped to 0.
pub const NEGATIVE_TOL: f64 = 1e-12;
/// Largest total-mass correction accepted after clamping.
pub const RENORMALIZATION_DRIFT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasible {
    /// The signed measure is genuinely negative at `index` (the first such entry).
    NegativeMass { index: u64, value: f64 },
    /// Clamping changed the total mass by more than the allowed drift.
    Drift { total: f64 },
    /// The truncation threshold fell below zero.
    NegativeThreshold { t_n: f64 },
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeMass { index, value } => {
                write!(f, "negative mass {value:.3e} at k = {index}")
            }
            Self::Drift { total } => write!(f, "total mass {total} after clamping"),
            Self::NegativeThreshold { t_n } => write!(f, "truncation threshold t_n = {t_n} < 0"),
        }
    }
}

pub type Construction = std::result::Result<FinitePmf, Infeasible>;

/// `(1 - eps) clean + eps q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedMixture {
    pub clean: FinitePmf,
    pub eps: f64,
    pub q: FinitePmf,
}

impl ContaminatedMixture {
    pub fn pmf(&self) -> Result<FinitePmf> {
        self.clean.mix(self.eps, &self.q)
    }

    pub fn tv_to(&self, target: &FinitePmf) -> Result<f64> {
        Ok(tv_distance(&self.pmf()?, target))
    }
}

/// Turns signed weights into a pmf, or reports why that is impossible.
fn finalize(weights: Vec<f64>) -> Construction {
    if let Some((idx, &value)) = weights.iter().enumerate().find(|(_, w)| **w < -NEGATIVE_TOL) {
        return Err(Infeasible::NegativeMass {
            index: idx as u64,
            value,
        });
    }
    let clamped: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if (total - 1.0).abs() > RENORMALIZATION_DRIFT {
        return Err(Infeasible::Drift { total });
    }
    Ok(FinitePmf::new(0, clamped.into_iter().map(|w| w / total).collect())
        .expect("clamped weights are a pmf"))
}

fn check_weight(name: &'static str, eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(domain(name, eps, "contamination weight must lie in (0, 1]"))
    }
}

/// `q₁ = (1/eps) Binom(m, p+r) - ((1-eps)/eps) Binom(m, p)`, so that
/// `(1-eps) Binom(m, p) + eps q₁ = Binom(m, p+r)`.
pub fn q1_exact_match(p: f64, r: f64, eps: f64, m: u64) -> Result<Construction> {
    check_range("p", p, 0.0, 1.0)?;
    check_range("r", r, 0.0, 1.0 - p)?;
    check_weight("eps", eps)?;
    let w = (0..=m)
        .map(|k| (binom_pmf_raw(m, p + r, k) - (1.0 - eps) * binom_pmf_raw(m, p, k)) / eps)
        .collect();
    Ok(finalize(w))
}

/// `q₀ = (1/eps_max) Binom(m, p) - ((1-eps_max)/eps_max) Binom(m, p-r)`, so
/// that `(1-eps_max) Binom(m, p-r) + eps_max q₀ = Binom(m, p)`.
pub fn q0_exact_match(p: f64, r: f64, eps_max: f64, m: u64) -> Result<Construction> {
    check_range("p", p, 0.0, 1.0)?;
    check_range("r", r, 0.0, p)?;
    check_weight("eps_max", eps_max)?;
    let w = (0..=m)
        .map(|k| {
            (binom_pmf_raw(m, p, k) - (1.0 - eps_max) * binom_pmf_raw(m, p - r, k)) / eps_max
        })
        .collect();
    Ok(finalize(w))
}

/// Radius below which [`q0_exact_match`] is guaranteed feasible for `p <= 1/2`.
pub fn q0_sufficient_radius(eps_max: f64, m: u64) -> f64 {
    (1.0 / (1.0 - eps_max)).ln() / (2.0 * m as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedQ0 {
    pub q: FinitePmf,
    pub t_n: f64,
    /// `TV((1-eps_max) Binom(m, p-r) + eps_max q, Binom(m, p))`.
    pub tv_single: f64,
    /// [`tv_product_bound`] of `tv_single` over `n` observations.
    pub tv_product: f64,
}

/// `q₀` with the lower tail of `Binom(m, p-r)` below `m t_n` cut away,
/// `t_n = p - 8 sqrt(p(1-p) log(n/alpha) / m)`.
pub fn q0_truncated(
    p: f64,
    r: f64,
    eps_max: f64,
    m: u64,
    n: usize,
    alpha: f64,
) -> Result<std::result::Result<TruncatedQ0, Infeasible>> {
    check_range("p", p, 0.0, 1.0)?;
    check_range("r", r, 0.0, p)?;
    check_weight("eps_max", eps_max)?;
    if !(alpha > 0.0 && alpha < 1.0) || n == 0 {
        return Err(domain("alpha", alpha, "need alpha in (0, 1) and n >= 1"));
    }
    let t_n = p - 8.0 * (p * (1.0 - p) * (n as f64 / alpha).ln() / m as f64).sqrt();
    if t_n < 0.0 {
        return Ok(Err(Infeasible::NegativeThreshold { t_n }));
    }
    let cut = (m as f64 * t_n - 1e-9).ceil();
    let kept = binom_sf(m, p - r, cut)?;
    let w = (0..=m)
        .map(|k| {
            let tail = if (k as f64) >= cut {
                binom_pmf_raw(m, p - r, k) / kept
            } else {
                0.0
            };
            (binom_pmf_raw(m, p, k) - (1.0 - eps_max) * tail) / eps_max
        })
        .collect();
    let q = match finalize(w) {
        Ok(q) => q,
        Err(e) => return Ok(Err(e)),
    };
    let mixture = ContaminatedMixture {
        clean: FinitePmf::binomial(m, p - r)?,
        eps: eps_max,
        q: q.clone(),
    };
    let tv_single = mixture.tv_to(&FinitePmf::binomial(m, p)?)?;
    Ok(Ok(TruncatedQ0 {
        q,
        t_n,
        tv_single,
        tv_product: tv_product_bound(tv_single, n),
    }))
}

fn pois_pair(a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let top = pois_support_max(a.max(b))?;
    let pa = (0..=top).map(|k| pois_pmf_raw(a, k)).collect();
    let pb = (0..=top).map(|k| pois_pmf_raw(b, k)).collect();
    Ok((pa, pb))
}

/// Poisson analogue of [`q1_exact_match`]: `(1-eps) Pois(λ) + eps q₁ = Pois(λ+r)`.
pub fn pois_q1_exact(lambda: f64, r: f64, eps: f64) -> Result<Construction> {
    check_weight("eps", eps)?;
    if !(r >= 0.0) {
        return Err(domain("r", r, "separation must be nonnegative"));
    }
    let (alt, base) = pois_pair(lambda + r, lambda)?;
    let w = alt
        .iter()
        .zip(&base)
        .map(|(a, b)| (a - (1.0 - eps) * b) / eps)
        .collect();
    Ok(finalize(w))
}

/// Poisson analogue of [`q0_exact_match`]: `(1-eps_max) Pois(λ-r) + eps_max q₀ = Pois(λ)`.
pub fn pois_q0_exact(lambda: f64, r: f64, eps_max: f64) -> Result<Construction> {
    check_weight("eps_max", eps_max)?;
    check_range("r", r, 0.0, lambda)?;
    let (base, alt) = pois_pair(lambda, lambda - r)?;
    let w = base
        .iter()
        .zip(&alt)
        .map(|(b, a)| (b - (1.0 - eps_max) * a) / eps_max)
        .collect();
    Ok(finalize(w))
}

/// `min(n tv, 1)`, the union bound for `n` independent draws.
pub fn tv_product_bound(tv_single: f64, n: usize) -> f64 {
    (n as f64 * tv_single).min(1.0)
}

/// TV between `0.9 Bernoulli(0) + 0.1 Bernoulli(1)` and `Bernoulli(0.1)`.
pub fn bernoulli_example_tv() -> f64 {
    let mixture = ContaminatedMixture {
        clean: FinitePmf::binomial(1, 0.0).expect("valid"),
        eps: 0.1,
        q: FinitePmf::binomial(1, 1.0).expect("valid"),
    };
    mixture
        .tv_to(&FinitePmf::binomial(1, 0.1).expect("valid"))
        .expect("valid mixture")
}

/// Outcome of one named construction, as reported by `adversary-check`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    /// `None` when the construction was infeasible.
    pub tv: Option<f64>,
    pub bound: f64,
    pub note: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.tv.is_some_and(|tv| tv <= self.bound)
    }
}

fn outcome(name: String, built: Construction, mix: impl FnOnce(&FinitePmf) -> Result<f64>) -> Result<CheckOutcome> {
    Ok(match built {
        Ok(q) => CheckOutcome {
            name,
            tv: Some(mix(&q)?),
            bound: 1e-10,
            note: String::new(),
        },
        Err(e) => CheckOutcome {
            name,
            tv: None,
            bound: 1e-10,
            note: e.to_string(),
        },
    })
}

/// Runs every construction on one parameter set.
#[allow(clippy::too_many_arguments)]
pub fn run_checks(
    m: u64,
    p: f64,
    r: f64,
    eps: f64,
    lambda: f64,
    n: usize,
    alpha: f64,
) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    out.push(CheckOutcome {
        name: "bernoulli-identity".into(),
        tv: Some(bernoulli_example_tv()),
        bound: 0.0,
        note: String::new(),
    });
    if p + r <= 1.0 {
        let built = q1_exact_match(p, r, eps, m)?;
        out.push(outcome(format!("q1 m={m} p={p} r={r} eps={eps}"), built, |q| {
            ContaminatedMixture { clean: FinitePmf::binomial(m, p)?, eps, q: q.clone() }
                .tv_to(&FinitePmf::binomial(m, p + r)?)
        })?);
    }
    if r <= p {
        let built = q0_exact_match(p, r, eps, m)?;
        out.push(outcome(format!("q0 m={m} p={p} r={r} eps_max={eps}"), built, |q| {
            ContaminatedMixture { clean: FinitePmf::binomial(m, p - r)?, eps, q: q.clone() }
                .tv_to(&FinitePmf::binomial(m, p)?)
        })?);
        let name = format!("q0-truncated m={m} p={p} r={r} eps_max={eps} n={n}");
        out.push(match q0_truncated(p, r, eps, m, n, alpha)? {
            Ok(t) => CheckOutcome {
                name,
                tv: Some(t.tv_single),
                bound: alpha / n as f64,
                note: format!("t_n={} n*tv={}", t.t_n, t.tv_product),
            },
            Err(e) => CheckOutcome {
                name,
                tv: None,
                bound: alpha / n as f64,
                note: e.to_string(),
            },
        });
    }
    let built = pois_q1_exact(lambda, r, eps)?;
    out.push(outcome(format!("pois-q1 lambda={lambda} r={r} eps={eps}"), built, |q| {
        let top = q.support_max();
        ContaminatedMixture { clean: FinitePmf::poisson_on(lambda, top), eps, q: q.clone() }
            .tv_to(&FinitePmf::poisson_on(lambda + r, top))
    })?);
    if r <= lambda {
        let built = pois_q0_exact(lambda, r, eps)?;
        out.push(outcome(format!("pois-q0 lambda={lambda} r={r} eps_max={eps}"), built, |q| {
            let top = q.support_max();
            ContaminatedMixture { clean: FinitePmf::poisson_on(lambda - r, top), eps, q: q.clone() }
                .tv_to(&FinitePmf::poisson_on(lambda, top))
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_examples() {
        let q = q1_exact_match(0.1, 0.02, 0.2, 4).unwrap().unwrap();
        let mix = ContaminatedMixture {
            clean: FinitePmf::binomial(4, 0.1).unwrap(),
            eps: 0.2,
            q,
        };
        assert!(mix.tv_to(&FinitePmf::binomial(4, 0.12).unwrap()).unwrap() <= 1e-12);

        let same = q1_exact_match(0.3, 0.0, 0.1, 5).unwrap().unwrap();
        assert!(tv_distance(&same, &FinitePmf::binomial(5, 0.3).unwrap()) < 1e-12);

        match q1_exact_match(0.1, 0.5, 0.05, 10).unwrap() {
            Err(Infeasible::NegativeMass { index, value }) => {
                assert_eq!(index, 0);
                assert!(value < 0.0);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn q0_examples() {
        let same = q0_exact_match(0.3, 0.0, 0.1, 5).unwrap().unwrap();
        assert!(tv_distance(&same, &FinitePmf::binomial(5, 0.3).unwrap()) < 1e-12);

        let r = q0_sufficient_radius(0.1, 6);
        let q = q0_exact_match(0.4, r, 0.1, 6).unwrap().unwrap();
        let mix = ContaminatedMixture {
            clean: FinitePmf::binomial(6, 0.4 - r).unwrap(),
            eps: 0.1,
            q,
        };
        assert!(mix.tv_to(&FinitePmf::binomial(6, 0.4).unwrap()).unwrap() <= 1e-12);

        assert!(q0_exact_match(0.4, 0.3, 0.05, 6).unwrap().is_err());
    }

    #[test]
    fn truncated_needs_nonnegative_threshold() {
        let out = q0_truncated(0.01, 0.001, 0.1, 10, 100, 0.05).unwrap();
        assert!(matches!(out, Err(Infeasible::NegativeThreshold { .. })));
    }

    #[test]
    fn poisson_examples() {
        let same = pois_q1_exact(2.0, 0.0, 0.1).unwrap().unwrap();
        assert!(tv_distance(&same, &FinitePmf::poisson(2.0).unwrap()) < 1e-12);
        // Feasible exactly when exp(-r) >= 1 - eps.
        let eps: f64 = 0.1;
        let edge = -(1.0 - eps).ln();
        assert!(pois_q1_exact(3.0, 0.99 * edge, eps).unwrap().is_ok());
        assert!(pois_q1_exact(3.0, 1.05 * edge, eps).unwrap().is_err());
        assert!(pois_q0_exact(3.0, 0.05, 0.1).unwrap().is_ok());
    }

    #[test]
    fn product_bound() {
        assert!((tv_product_bound(0.001, 100) - 0.1).abs() < 1e-15);
        assert_eq!(tv_product_bound(0.0, 7), 0.0);
        assert_eq!(tv_product_bound(0.5, 3), 1.0);
    }

    #[test]
    fn bernoulli_identity() {
        assert_eq!(bernoulli_example_tv(), 0.0);
    }
}
