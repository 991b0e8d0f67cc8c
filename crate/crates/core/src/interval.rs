// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BinomRobust,
    BinomKnownEps,
    Bernoulli,
    PoissonRobust,
    ErConservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CiWarning {
    /// `log(2/alpha)/n + eps_max` exceeded the configured threshold, so the
    /// coverage guarantee is not backed by theory.
    Smallness { value: f64, threshold: f64 },
    /// The Poisson rate grid was truncated at `cap` although the data asked
    /// for `requested`.
    RateGridCapped { requested: u64, cap: u64 },
}

impl fmt::Display for CiWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Smallness { value, threshold } => write!(
                f,
                "log(2/alpha)/n + eps_max = {value:.4} exceeds {threshold}; coverage is not guaranteed"
            ),
            Self::RateGridCapped { requested, cap } => {
                write!(f, "rate grid capped at {cap} (data suggest {requested})")
            }
        }
    }
}

/// A closed interval `[lower, upper]`. `lower > upper` encodes the empty set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub method: Method,
    pub warnings: Vec<CiWarning>,
}

impl ConfidenceInterval {
    pub fn new(lower: f64, upper: f64, alpha: f64, method: Method) -> Self {
        Self {
            lower,
            upper,
            alpha,
            method,
            warnings: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn length(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Solves `{q in [0,1] : |center - q| <= a sqrt(q(1-q)) + b}` for `a, b >= 0`
/// and `center` in `[0,1]`.
///
/// Both sides of the inequality are handled separately. Above the center
/// the boundary is the larger root of `(1+a^2) q^2 - (2c + a^2) q + c^2`
/// with `c = center + b`; below it the smaller root with `c = center - b`.
pub fn wilson_type_bounds(center: f64, a: f64, b: f64) -> (f64, f64) {
    let a2 = a * a;
    let upper = {
        let c = center + b;
        if c >= 1.0 {
            1.0
        } else {
            let disc = a2 * (4.0 * c * (1.0 - c) + a2);
            (((2.0 * c + a2) + disc.max(0.0).sqrt()) / (2.0 * (1.0 + a2))).min(1.0)
        }
    };
    let lower = {
        let c = center - b;
        if c <= 0.0 {
            0.0
        } else {
            let disc = a2 * (4.0 * c * (1.0 - c) + a2);
            let big = ((2.0 * c + a2) + disc.max(0.0).sqrt()) / (2.0 * (1.0 + a2));
            // Product of the roots is c^2 / (1 + a^2); avoids cancellation.
            (c * c / ((1.0 + a2) * big)).max(0.0)
        }
    };
    (lower, upper)
}
