//! Distribution summaries in the shape KPI tables expect.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::series::{MetricKind, SamplePoint, SampleSeries};

/// Headline statistics plus the tail quantiles a KPI table reports.
///
/// Latency and throughput handle outage-flagged points differently:
///
/// * latency: outage probes are excluded from the moments, but contribute
///   "beyond the threshold" mass to the upper tail, so a `p99` of `None`
///   means the 99th percentile exceeds the outage threshold;
/// * throughput: every bin keeps its value, so the moments run over all
///   bins and the lower-tail quantiles show the starved ones.
///
/// All moment fields are `None` when no usable samples remain.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DistributionSummary {
    pub samples: usize,
    pub outage_probability_pct: f64,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    pub std_dev: Option<f64>,
    /// Lower-tail quantiles at 10% / 5% / 1%.
    pub p10: Option<f64>,
    pub p5: Option<f64>,
    pub p1: Option<f64>,
    /// Upper-tail quantiles at 99% / 99.9% / 99.99%; `None` when the rank
    /// falls inside the outage mass.
    pub p99: Option<f64>,
    pub p99_9: Option<f64>,
    pub p99_99: Option<f64>,
}

pub fn summarize(series: &SampleSeries) -> Result<DistributionSummary, StatsError> {
    summarize_points(series.metric(), series.points())
}

pub fn summarize_points(
    metric: MetricKind,
    points: &[SamplePoint],
) -> Result<DistributionSummary, StatsError> {
    if points.is_empty() {
        return Err(StatsError::Empty);
    }
    let n_total = points.len();
    let outage = points.iter().filter(|p| p.outage).count();

    // Values entering the moments; whatever is left over ranks above every
    // finite value when taking upper-tail quantiles.
    let mut valid: Vec<f64> = match metric {
        MetricKind::RttMs => {
            points.iter().filter(|p| !p.outage).filter_map(|p| p.value).collect()
        }
        MetricKind::ThroughputMbps => points.iter().filter_map(|p| p.value).collect(),
    };
    valid.sort_by(f64::total_cmp);

    let quantile = |p: f64| -> Option<f64> {
        // Rank over all points, with the unusable mass sorted above the max.
        valid.get(super::lower_rank(n_total, p) - 1).copied()
    };

    let (min, max, median, mean, std_dev) = if valid.is_empty() {
        (None, None, None, None, None)
    } else {
        let n = valid.len() as f64;
        let mean = valid.iter().sum::<f64>() / n;
        let std = if valid.len() < 2 {
            0.0
        } else {
            (valid.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        let median_idx = super::lower_rank(valid.len(), 0.5) - 1;
        (
            Some(valid[0]),
            Some(*valid.last().unwrap()),
            Some(valid[median_idx]),
            Some(mean),
            Some(std),
        )
    };

    Ok(DistributionSummary {
        samples: n_total,
        outage_probability_pct: outage as f64 / n_total as f64 * 100.0,
        min,
        median,
        mean,
        max,
        std_dev,
        p10: quantile(0.10),
        p5: quantile(0.05),
        p1: quantile(0.01),
        p99: quantile(0.99),
        p99_9: quantile(0.999),
        p99_99: quantile(0.9999),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rtt_points(values: &[(f64, Option<f64>, bool)]) -> Vec<SamplePoint> {
        values
            .iter()
            .enumerate()
            .map(|(i, &(_, v, o))| SamplePoint { t_s: i as f64, value: v, outage: o })
            .collect()
    }

    #[test]
    fn constant_series_has_zero_std_dev() {
        let pts: Vec<SamplePoint> = (0..50)
            .map(|i| SamplePoint { t_s: i as f64, value: Some(20.0), outage: false })
            .collect();
        let s = summarize_points(MetricKind::RttMs, &pts).unwrap();
        assert_eq!(s.std_dev, Some(0.0));
        assert_eq!(s.median, Some(20.0));
        assert_eq!(s.mean, Some(20.0));
        assert_eq!(s.outage_probability_pct, 0.0);
    }

    #[test]
    fn outage_fraction_over_all_samples() {
        // 1.1% of 10,000 probes beyond the threshold.
        let mut pts = Vec::new();
        for i in 0..10_000 {
            let outage = i % 1000 < 11;
            pts.push(SamplePoint {
                t_s: i as f64,
                value: if outage { None } else { Some(40.0) },
                outage,
            });
        }
        let s = summarize_points(MetricKind::RttMs, &pts).unwrap();
        assert_relative_eq!(s.outage_probability_pct, 1.1, epsilon = 1e-9);
        // Moments exclude the outage probes.
        assert_eq!(s.mean, Some(40.0));
        // The 99.9% rank falls inside the outage mass.
        assert_eq!(s.p99_9, None);
        assert_eq!(s.p99, Some(40.0));
    }

    #[test]
    fn all_outage_latency_has_absent_stats() {
        let pts = rtt_points(&[(0.0, None, true), (0.0, None, true)]);
        let s = summarize_points(MetricKind::RttMs, &pts).unwrap();
        assert_eq!(s.outage_probability_pct, 100.0);
        assert_eq!(s.median, None);
        assert_eq!(s.mean, None);
        assert_eq!(s.p99, None);
    }

    #[test]
    fn starved_throughput_bins_keep_their_values() {
        let pts: Vec<SamplePoint> = (0..10)
            .map(|i| SamplePoint { t_s: i as f64, value: Some(0.4), outage: true })
            .collect();
        let s = summarize_points(MetricKind::ThroughputMbps, &pts).unwrap();
        assert_eq!(s.outage_probability_pct, 100.0);
        assert_eq!(s.median, Some(0.4));
        assert_eq!(s.min, Some(0.4));
    }

    #[test]
    fn empty_series_is_an_error() {
        assert_eq!(summarize_points(MetricKind::RttMs, &[]), Err(StatsError::Empty));
    }

    #[test]
    fn tail_quantiles_constructed_fixture() {
        // 1,000 samples arranged so the 99% quantile is 118 and 99.9% is 489.
        let mut values = vec![30.0; 989];
        values.extend_from_slice(&[118.0; 9]);
        values.push(489.0);
        values.push(851.0);
        assert_eq!(values.len(), 1000);
        let pts: Vec<SamplePoint> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| SamplePoint { t_s: i as f64, value: Some(v), outage: false })
            .collect();
        let s = summarize_points(MetricKind::RttMs, &pts).unwrap();
        assert_eq!(s.p99, Some(118.0));
        assert_eq!(s.p99_9, Some(489.0));
        assert_eq!(s.p99_99, Some(851.0));
        assert_eq!(s.max, Some(851.0));
    }

    #[test]
    fn matches_naive_full_sort_oracle() {
        let mut rng_state = 0x12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 33) as f64 / (1u64 << 31) as f64 * 200.0
        };
        let pts: Vec<SamplePoint> = (0..5_000)
            .map(|i| {
                let v = next();
                SamplePoint { t_s: i as f64, value: Some(v), outage: v > 180.0 }
            })
            .collect();
        let s = summarize_points(MetricKind::RttMs, &pts).unwrap();

        // Oracle: sort the non-outage values, rank over the full count.
        let mut valid: Vec<f64> =
            pts.iter().filter(|p| !p.outage).map(|p| p.value.unwrap()).collect();
        valid.sort_by(f64::total_cmp);
        let n_total = pts.len() as f64;
        let oracle_q = |p: f64| -> Option<f64> {
            let mut k = 1usize;
            while (k as f64) / n_total < p {
                k += 1;
            }
            valid.get(k - 1).copied()
        };
        for (got, p) in [(s.p10, 0.10), (s.p5, 0.05), (s.p1, 0.01), (s.p99, 0.99), (s.p99_9, 0.999)] {
            assert_eq!(got, oracle_q(p), "quantile {p}");
        }
        assert_eq!(s.min, valid.first().copied());
        assert_eq!(s.median, oracle_q(0.5));
    }
}
