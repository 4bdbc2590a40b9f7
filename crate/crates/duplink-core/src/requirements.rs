//! Connectivity requirements and measured availability against them.
//!
//! A requirement is an (availability, latency, downlink, uplink) quadruple
//! for one communication type or use case. Availability against a
//! requirement is the fraction of samples that met the corresponding KPI:
//! probes at or under the latency budget, bins at or above the rate floor.
//! Probes that never got a reply count as failures.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::series::SampleSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RequirementKind {
    /// General communication class; informative rows in the matrix.
    CommunicationType,
    /// Concrete use case; these drive the technology-ready counts.
    UseCase,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UseCaseRequirement {
    pub name: String,
    pub kind: RequirementKind,
    /// Required availability as a fraction in (0, 1), e.g. 0.99.
    pub min_availability: f64,
    pub max_latency_ms: f64,
    pub min_dl_mbps: f64,
    pub min_ul_mbps: f64,
}

impl UseCaseRequirement {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.is_empty() {
            out.push("requirement name must not be empty".into());
        }
        if !(self.min_availability > 0.0 && self.min_availability < 1.0) {
            out.push(format!("{}: availability {} outside (0, 1)", self.name, self.min_availability));
        }
        for (label, v) in [
            ("latency", self.max_latency_ms),
            ("dl", self.min_dl_mbps),
            ("ul", self.min_ul_mbps),
        ] {
            if !(v > 0.0) {
                out.push(format!("{}: {label} bound {v} must be > 0", self.name));
            }
        }
        out
    }
}

/// Measured availability of the three KPIs, in percent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct KpiAvailability {
    pub latency_pct: f64,
    pub dl_pct: f64,
    pub ul_pct: f64,
}

/// Fraction of probes with a round trip at or under `max_latency_ms`.
/// Outage probes count against availability.
pub fn latency_availability_pct(series: &SampleSeries, max_latency_ms: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Stats(crate::stats::StatsError::Empty));
    }
    let ok = series
        .points()
        .iter()
        .filter(|p| !p.outage && p.value.is_some_and(|v| v <= max_latency_ms))
        .count();
    Ok(ok as f64 / series.len() as f64 * 100.0)
}

/// Fraction of bins delivering at least `min_mbps`.
pub fn throughput_availability_pct(series: &SampleSeries, min_mbps: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Stats(crate::stats::StatsError::Empty));
    }
    let ok = series.points().iter().filter(|p| p.value.is_some_and(|v| v >= min_mbps)).count();
    Ok(ok as f64 / series.len() as f64 * 100.0)
}

/// Availability of one technology's latency/DL/UL series against a
/// requirement.
pub fn availability_against(
    latency: &SampleSeries,
    dl: &SampleSeries,
    ul: &SampleSeries,
    req: &UseCaseRequirement,
) -> Result<KpiAvailability> {
    let problems = req.problems();
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems).into());
    }
    Ok(KpiAvailability {
        latency_pct: latency_availability_pct(latency, req.max_latency_ms)?,
        dl_pct: throughput_availability_pct(dl, req.min_dl_mbps)?,
        ul_pct: throughput_availability_pct(ul, req.min_ul_mbps)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{MetricKind, SamplePoint, SeriesMetadata};

    fn series(metric: MetricKind, points: Vec<SamplePoint>) -> SampleSeries {
        let meta = SeriesMetadata { metric: Some(metric), label: "t".into(), reproducible: true, ..Default::default() };
        SampleSeries::new(meta, points).unwrap()
    }

    fn rtt_series(values: &[Option<f64>]) -> SampleSeries {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, v)| SamplePoint { t_s: i as f64, value: *v, outage: v.is_none() || v.unwrap() > 2000.0 })
            .collect();
        series(MetricKind::RttMs, points)
    }

    fn req(avail: f64, lat: f64, dl: f64, ul: f64) -> UseCaseRequirement {
        UseCaseRequirement {
            name: "t".into(),
            kind: RequirementKind::UseCase,
            min_availability: avail,
            max_latency_ms: lat,
            min_dl_mbps: dl,
            min_ul_mbps: ul,
        }
    }

    #[test]
    fn all_probes_within_budget_is_full_availability() {
        let s = rtt_series(&[Some(50.0); 20].to_vec());
        assert_eq!(latency_availability_pct(&s, 100.0).unwrap(), 100.0);
    }

    #[test]
    fn budget_below_every_sample_is_zero() {
        let s = rtt_series(&[Some(50.0); 20].to_vec());
        assert_eq!(latency_availability_pct(&s, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn constructed_fraction_is_recovered() {
        // 982 of 1,000 probes at or under 100 ms.
        let mut values: Vec<Option<f64>> = vec![Some(50.0); 982];
        values.extend(vec![Some(500.0); 10]);
        values.extend(vec![None; 8]);
        let s = rtt_series(&values);
        assert!((latency_availability_pct(&s, 100.0).unwrap() - 98.2).abs() < 1e-9);
    }

    #[test]
    fn boundary_sample_counts_as_met() {
        let s = rtt_series(&[Some(100.0), Some(100.1)]);
        assert_eq!(latency_availability_pct(&s, 100.0).unwrap(), 50.0);
    }

    #[test]
    fn throughput_counts_bins_at_or_above_floor() {
        let points = [30.0, 29.9, 35.0, 0.2]
            .iter()
            .enumerate()
            .map(|(i, &v)| SamplePoint { t_s: i as f64, value: Some(v), outage: v < 0.5 })
            .collect();
        let s = series(MetricKind::ThroughputMbps, points);
        assert_eq!(throughput_availability_pct(&s, 30.0).unwrap(), 50.0);
    }

    #[test]
    fn triple_availability_uses_each_series() {
        let lat = rtt_series(&[Some(50.0), Some(150.0)]);
        let dl = series(
            MetricKind::ThroughputMbps,
            vec![
                SamplePoint { t_s: 0.0, value: Some(60.0), outage: false },
                SamplePoint { t_s: 1.0, value: Some(10.0), outage: false },
            ],
        );
        let ul = series(
            MetricKind::ThroughputMbps,
            vec![
                SamplePoint { t_s: 0.0, value: Some(60.0), outage: false },
                SamplePoint { t_s: 1.0, value: Some(55.0), outage: false },
            ],
        );
        let got = availability_against(&lat, &dl, &ul, &req(0.99, 100.0, 50.0, 50.0)).unwrap();
        assert_eq!(got, KpiAvailability { latency_pct: 50.0, dl_pct: 50.0, ul_pct: 100.0 });
    }

    #[test]
    fn invalid_requirements_rejected() {
        assert!(!req(1.5, 100.0, 1.0, 1.0).problems().is_empty());
        assert!(!req(0.99, 0.0, 1.0, 1.0).problems().is_empty());
        assert!(req(0.99, 100.0, 1.0, 1.0).problems().is_empty());
    }
}
