//! Streaming moments and Student-t confidence intervals.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Welford accumulator; `merge` combines partial results (Chan et al.).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn merge(&mut self, other: &Summary) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn ci(&self, level: f64) -> Interval {
        let half = if self.count < 2 {
            f64::INFINITY
        } else {
            t_quantile(self.count - 1, 0.5 + level / 2.0) * self.std_err()
        };
        Interval {
            mean: self.mean,
            lower: self.mean - half,
            upper: self.mean + half,
            level,
            samples: self.count,
        }
    }

    pub fn ci99(&self) -> Interval {
        self.ci(0.99)
    }
}

impl FromIterator<f64> for Summary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summary::new();
        for v in iter {
            s.push(v);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub samples: u64,
}

impl Interval {
    /// An interval of zero width around an exactly known value.
    pub fn exact(value: f64) -> Self {
        Interval {
            mean: value,
            lower: value,
            upper: value,
            level: 1.0,
            samples: 0,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }
}

/// Upper `p`-quantile of Student's t with `df` degrees of freedom.
pub fn t_quantile(df: u64, p: f64) -> f64 {
    match StudentsT::new(0.0, 1.0, df as f64) {
        Ok(t) => t.inverse_cdf(p),
        Err(_) => f64::INFINITY,
    }
}

/// Outcome of comparing an estimate against a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Decides `value ≥ c · mean` from a confidence interval on `mean`
    /// (`c ≥ 0`).
    pub fn at_least_scaled(value: f64, c: f64, ci: &Interval, tol: f64) -> Verdict {
        if value + tol >= c * ci.upper {
            Verdict::Holds
        } else if value + tol < c * ci.lower {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }

    /// Decides `c · mean ≥ value` from a confidence interval on `mean`.
    pub fn scaled_at_least(c: f64, ci: &Interval, value: f64, tol: f64) -> Verdict {
        if c * ci.lower + tol >= value {
            Verdict::Holds
        } else if c * ci.upper + tol < value {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let data = [1.0, 4.0, 2.5, -3.0, 7.25, 0.5];
        let s: Summary = data.iter().copied().collect();
        let mean = data.iter().sum::<f64>() / 6.0;
        let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 5.0;
        assert!((s.mean() - mean).abs() < 1e-14);
        assert!((s.variance() - var).abs() < 1e-13);
    }

    #[test]
    fn merge_equals_sequential() {
        let data: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let all: Summary = data.iter().copied().collect();
        let mut left: Summary = data[..40].iter().copied().collect();
        let right: Summary = data[40..].iter().copied().collect();
        left.merge(&right);
        assert!((left.mean() - all.mean()).abs() < 1e-13);
        assert!((left.variance() - all.variance()).abs() < 1e-12);
        assert_eq!(left.count(), 100);
    }

    #[test]
    fn t_quantile_large_df_approaches_normal() {
        assert!((t_quantile(1_000_000, 0.995) - 2.5758).abs() < 1e-3);
        assert!((t_quantile(10, 0.995) - 3.1693).abs() < 1e-3);
    }
}
