//! Empirical cumulative distribution over a finite sample.

use super::StatsError;

/// Sorted sample values with step-function CDF evaluation.
///
/// For a sample `x_1..x_n`, `F(x)` is the fraction of samples `<= x`:
/// non-decreasing, right-continuous, 0 below the minimum and 1 at the
/// maximum. Quantiles are the lower empirical quantile (no interpolation):
/// the smallest sample value `x` with `F(x) >= p`.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Result<Self, StatsError> {
        let mut sorted: Vec<f64> = Vec::new();
        for v in samples {
            if !v.is_finite() {
                return Err(StatsError::NonFinite { value: v });
            }
            sorted.push(v);
        }
        if sorted.is_empty() {
            return Err(StatsError::Empty);
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Fraction of samples `> x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Smallest sample value whose CDF reaches `p`, for `p` in (0, 1].
    pub fn quantile(&self, p: f64) -> Result<f64, StatsError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(StatsError::InvalidQuantile { p });
        }
        let n = self.sorted.len();
        Ok(self.sorted[super::lower_rank(n, p) - 1])
    }

    /// Sorted sample values.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// The distinct step points `(x, F(x))`, useful for plotting.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }
}
