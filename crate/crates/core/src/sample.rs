// SPDX-License-Identifier: Apache-2.0

use crate::error::{domain, Error, Result};

/// Nonnegative integer observations with a cached sorted copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    values: Vec<u64>,
    sorted: Vec<u64>,
}

impl SampleSet {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("n", 0.0, "need at least one observation"));
        }
        let mut sorted = values.clone();
        sorted.sort_unstable();
        Ok(Self { values, sorted })
    }

    /// Parses whitespace-separated nonnegative integers.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("`{tok}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn sorted(&self) -> &[u64] {
        &self.sorted
    }

    /// `#{X_i <= c}`; zero for negative `c`.
    pub fn count_le(&self, c: i64) -> usize {
        if c < 0 {
            return 0;
        }
        let c = c as u64;
        self.sorted.partition_point(|&x| x <= c)
    }

    /// `#{X_i >= c}`; everything for `c <= 0`.
    pub fn count_ge(&self, c: i64) -> usize {
        if c <= 0 {
            return self.n();
        }
        let c = c as u64;
        self.n() - self.sorted.partition_point(|&x| x < c)
    }

    pub fn count_eq(&self, c: u64) -> usize {
        self.sorted.partition_point(|&x| x <= c) - self.sorted.partition_point(|&x| x < c)
    }

    /// 1-based order statistic `X_(k)`.
    pub fn order_statistic(&self, k: usize) -> Result<u64> {
        if k == 0 || k > self.n() {
            return Err(domain("k", k as f64, "order statistic index out of 1..=n"));
        }
        Ok(self.sorted[k - 1])
    }

    /// Fails if any observation exceeds `m`.
    pub fn check_max(&self, m: u64) -> Result<()> {
        match self.sorted.last() {
            Some(&x) if x > m => Err(domain("X", x as f64, "observation exceeds m")),
            _ => Ok(()),
        }
    }

    /// The sample `{m - X_i}`; every value must be at most `m`.
    pub fn reflect(&self, m: u64) -> Result<Self> {
        self.check_max(m)?;
        Self::new(self.values.iter().map(|&x| m - x).collect())
    }
}

/// `(1/n) #{X_i <= t}` for a real threshold `t`.
pub fn empirical_cdf(s: &SampleSet, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let cnt = if t >= u64::MAX as f64 {
        s.n()
    } else {
        s.count_le(t.floor() as i64)
    };
    cnt as f64 / s.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_examples() {
        let s = SampleSet::new(vec![0, 1, 1, 3]).unwrap();
        assert_eq!(empirical_cdf(&s, 1.0), 0.75);
        assert_eq!(empirical_cdf(&s, -1.0), 0.0);
        assert_eq!(empirical_cdf(&s, 2.5), 0.75);
        let single = SampleSet::new(vec![5]).unwrap();
        assert_eq!(empirical_cdf(&single, 5.0), 1.0);
    }

    #[test]
    fn counts() {
        let s = SampleSet::new(vec![3, 0, 2, 2, 7]).unwrap();
        assert_eq!(s.count_le(2), 3);
        assert_eq!(s.count_le(-1), 0);
        assert_eq!(s.count_ge(2), 4);
        assert_eq!(s.count_ge(0), 5);
        assert_eq!(s.count_ge(8), 0);
        assert_eq!(s.count_eq(2), 2);
        assert_eq!(s.order_statistic(5).unwrap(), 7);
        assert!(s.order_statistic(0).is_err());
    }

    #[test]
    fn parsing_and_reflection() {
        let s = SampleSet::parse(" 1 2\n0\t3 ").unwrap();
        assert_eq!(s.values(), &[1, 2, 0, 3]);
        assert_eq!(s.reflect(3).unwrap().values(), &[2, 1, 3, 0]);
        assert!(s.reflect(2).is_err());
        assert!(SampleSet::parse("1 -2").is_err());
        assert!(SampleSet::parse("").is_err());
    }
}
