// SPDX-License-Identifier: Apache-2.0

//! The contamination grid and the scale `A` shared by both interval families.

use crate::error::{domain, Result};
use crate::interval::CiWarning;

/// Default threshold on `log(2/alpha)/n + eps_max` above which a warning is
/// attached to computed intervals.
pub const DEFAULT_WARN_THRESHOLD: f64 = 0.1;

pub fn log24(alpha: f64) -> f64 {
    (24.0 / alpha).ln()
}

/// `A = eps + sqrt(log(24/alpha) / (2n))`.
pub fn contamination_scale(eps: f64, n: usize, alpha: f64) -> f64 {
    eps + (log24(alpha) / (2.0 * n as f64)).sqrt()
}

/// `log(1/A)`, floored at zero so tiny samples do not flip signs.
pub fn log_inv_scale(eps: f64, n: usize, alpha: f64) -> f64 {
    (-contamination_scale(eps, n, alpha).ln()).max(0.0)
}

pub fn smallness(n: usize, alpha: f64, eps_max: f64) -> f64 {
    (2.0 / alpha).ln() / n as f64 + eps_max
}

pub(crate) fn smallness_warning(
    n: usize,
    alpha: f64,
    eps_max: f64,
    threshold: f64,
) -> Option<CiWarning> {
    let value = smallness(n, alpha, eps_max);
    (value > threshold).then(|| {
        log::warn!("log(2/alpha)/n + eps_max = {value:.4} exceeds {threshold}; coverage is heuristic");
        CiWarning::Smallness { value, threshold }
    })
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("alpha", alpha, "must lie in (0, 1)"))
    }
}

/// Doubling grid `{2^k log(24/alpha)/n} ∪ {eps_max}` on `(0, eps_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    pub fn new(n: usize, alpha: f64, eps_max: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return Err(domain("n", 0.0, "need at least one observation"));
        }
        if !(eps_max > 0.0 && eps_max <= 1.0) {
            return Err(domain("eps_max", eps_max, "grid needs eps_max in (0, 1]"));
        }
        let base = log24(alpha) / n as f64;
        let mut values = Vec::new();
        let ratio = eps_max / base;
        if ratio >= 1.0 {
            let k_max = ratio.log2().floor() as i32;
            for k in 0..=k_max {
                let v = base * 2f64.powi(k);
                if v <= eps_max {
                    values.push(v);
                }
            }
        }
        if values.last().is_none_or(|&v| v < eps_max) {
            values.push(eps_max);
        }
        Ok(Self { values })
    }

    /// As [`EpsilonGrid::new`], except `eps_max = 0` gives the grid `{0}`.
    pub fn for_interval(n: usize, alpha: f64, eps_max: f64) -> Result<Self> {
        if eps_max == 0.0 {
            check_alpha(alpha)?;
            return Ok(Self { values: vec![0.0] });
        }
        Self::new(n, alpha, eps_max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
