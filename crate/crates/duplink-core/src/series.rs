//! KPI sample series and their on-disk form.
//!
//! A series is an ordered list of `(timestamp, value, outage)` points for one
//! metric, persisted as CSV with a JSON metadata sidecar. Analysis never
//! needs anything beyond these two files, so reports stay recomputable from
//! what is on disk.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    RttMs,
    ThroughputMbps,
}

impl MetricKind {
    pub fn unit(self) -> &'static str {
        match self {
            MetricKind::RttMs => "ms",
            MetricKind::ThroughputMbps => "Mbps",
        }
    }
}

/// One measurement: a probe or a one-second traffic bin.
///
/// `value` is `None` when nothing was measured (a probe that never got a
/// reply). Outage-flagged points may still carry a value, e.g. a starved
/// throughput bin keeps its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub t_s: f64,
    pub value: Option<f64>,
    pub outage: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SeriesMetadata {
    pub metric: Option<MetricKind>,
    /// What produced the series: a link name, or a multi-connectivity label.
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Probe or load configuration the series was captured under.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    /// False for live-socket captures, which cannot be replayed bit-exactly.
    pub reproducible: bool,
}

#[derive(Debug, Clone)]
pub struct SampleSeries {
    pub meta: SeriesMetadata,
    points: Vec<SamplePoint>,
}

impl SampleSeries {
    /// Validates that timestamps increase strictly and values are finite
    /// and non-negative.
    pub fn new(meta: SeriesMetadata, points: Vec<SamplePoint>) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for p in &points {
            if !p.t_s.is_finite() || p.t_s <= prev {
                return Err(Error::Series(format!(
                    "timestamps must increase strictly ({} after {})",
                    p.t_s, prev
                )));
            }
            prev = p.t_s;
            if let Some(v) = p.value {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Series(format!("value {v} at t={} invalid", p.t_s)));
                }
            }
        }
        Ok(Self { meta, points })
    }

    pub fn metric(&self) -> MetricKind {
        self.meta.metric.unwrap_or(MetricKind::RttMs)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    /// Values present in the series, outage-flagged or not.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().filter_map(|p| p.value)
    }

    pub fn outage_count(&self) -> usize {
        self.points.iter().filter(|p| p.outage).count()
    }

    pub fn outage_fraction_pct(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.outage_count() as f64 / self.points.len() as f64 * 100.0
    }

    /// Writes `<path>` as CSV and `<path>.meta.json` alongside it.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut out = String::from("timestamp_s,value,outage_flag\n");
        for p in &self.points {
            match p.value {
                Some(v) => out.push_str(&format!("{},{},{}\n", p.t_s, v, p.outage as u8)),
                None => out.push_str(&format!("{},,{}\n", p.t_s, p.outage as u8)),
            }
        }
        fs::File::create(path)?.write_all(out.as_bytes())?;
        let meta_json = serde_json::to_string_pretty(&self.meta)?;
        fs::File::create(sidecar_path(path))?.write_all(meta_json.as_bytes())?;
        Ok(())
    }

    /// Reads a series written by [`SampleSeries::write_csv`]. A missing
    /// sidecar degrades to default metadata.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut text = String::new();
        fs::File::open(path)?.read_to_string(&mut text)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Series(format!(
                    "{}: line {} has {} fields, expected 3",
                    path.display(),
                    lineno + 1,
                    fields.len()
                )));
            }
            let t_s: f64 = fields[0]
                .parse()
                .map_err(|e| Error::Series(format!("{}: bad timestamp: {e}", path.display())))?;
            let value = if fields[1].is_empty() {
                None
            } else {
                Some(fields[1].parse().map_err(|e| {
                    Error::Series(format!("{}: bad value: {e}", path.display()))
                })?)
            };
            let outage = fields[2].trim() == "1";
            points.push(SamplePoint { t_s, value, outage });
        }
        let meta = match fs::read_to_string(sidecar_path(path)) {
            Ok(json) => serde_json::from_str(&json)?,
            Err(_) => SeriesMetadata { label: path.display().to_string(), ..Default::default() },
        };
        Self::new(meta, points)
    }
}

fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(label: &str, metric: MetricKind) -> SeriesMetadata {
        SeriesMetadata { metric: Some(metric), label: label.into(), reproducible: true, ..Default::default() }
    }

    #[test]
    fn rejects_non_increasing_timestamps() {
        let pts = vec![
            SamplePoint { t_s: 0.0, value: Some(1.0), outage: false },
            SamplePoint { t_s: 0.0, value: Some(2.0), outage: false },
        ];
        assert!(SampleSeries::new(meta("x", MetricKind::RttMs), pts).is_err());
    }

    #[test]
    fn rejects_negative_values() {
        let pts = vec![SamplePoint { t_s: 0.0, value: Some(-1.0), outage: false }];
        assert!(SampleSeries::new(meta("x", MetricKind::RttMs), pts).is_err());
    }

    #[test]
    fn csv_round_trip_preserves_points_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let pts = vec![
            SamplePoint { t_s: 0.1, value: Some(20.25), outage: false },
            SamplePoint { t_s: 0.2, value: None, outage: true },
            SamplePoint { t_s: 0.30000000000000004, value: Some(2150.5), outage: true },
        ];
        let series = SampleSeries::new(meta("mc", MetricKind::RttMs), pts.clone()).unwrap();
        series.write_csv(&path).unwrap();
        let back = SampleSeries::read_csv(&path).unwrap();
        assert_eq!(back.points(), pts.as_slice());
        assert_eq!(back.meta.label, "mc");
        assert_eq!(back.meta.metric, Some(MetricKind::RttMs));
    }

    #[test]
    fn outage_fraction_counts_flags() {
        let pts = vec![
            SamplePoint { t_s: 0.0, value: Some(1.0), outage: false },
            SamplePoint { t_s: 1.0, value: None, outage: true },
            SamplePoint { t_s: 2.0, value: Some(3.0), outage: false },
            SamplePoint { t_s: 3.0, value: Some(0.1), outage: true },
        ];
        let s = SampleSeries::new(meta("x", MetricKind::ThroughputMbps), pts).unwrap();
        assert_eq!(s.outage_fraction_pct(), 50.0);
    }
}
