//! Sample statistics: empirical distributions, KPI summaries, and the
//! confidence-interval machinery used to validate them.

mod confidence;
mod ecdf;
mod summary;

pub use confidence::{dkw_epsilon, normal_quantile, wilson_bound_at, wilson_interval, DkwBound, WilsonBound};
pub use ecdf::EmpiricalDistribution;
pub use summary::{summarize, summarize_points, DistributionSummary};

use thiserror::Error;

/// Smallest rank `k` in `1..=n` with `k/n >= p`; the index of the lower
/// empirical quantile is `k - 1`. Expects `0 < p <= 1`.
pub(crate) fn lower_rank(n: usize, p: f64) -> usize {
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if (mid as f64) / (n as f64) >= p {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample set")]
    Empty,
    #[error("non-finite sample {value}")]
    NonFinite { value: f64 },
    #[error("quantile probability {p} outside (0, 1]")]
    InvalidQuantile { p: f64 },
    #[error("alpha {alpha} outside the valid range")]
    InvalidAlpha { alpha: f64 },
    #[error("sample count must be at least 1")]
    InvalidCount,
    #[error("successes k={k} exceed trials n={n}")]
    KOutOfRange { k: u64, n: u64 },
}
