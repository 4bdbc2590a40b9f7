//! Coverage statistics from signal-strength traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::RsrpTrace;

/// Per-technology view of one operator's trace.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TechnologyCoverage {
    /// Share of records served by this technology, percent.
    pub availability_pct: f64,
    pub rsrp_mean_dbm: Option<f64>,
    pub rsrp_std_db: Option<f64>,
    /// Share of this technology's records below the critical threshold.
    pub below_critical_pct: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoverageStats {
    pub records: usize,
    pub critical_dbm: f64,
    pub per_technology: BTreeMap<String, TechnologyCoverage>,
    /// Share of records with no technology at all, percent.
    pub out_of_coverage_pct: f64,
    /// Share of in-coverage records below the critical threshold, percent.
    pub below_critical_pct: Option<f64>,
}

/// Aggregates a trace into availability, signal statistics, and the critical
/// low-signal fraction. Availability per technology plus its unavailability
/// always totals 100%.
pub fn coverage_stats(trace: &RsrpTrace, critical_dbm: f64) -> Result<CoverageStats> {
    let records = trace.records();
    if records.is_empty() {
        return Err(Error::Trace("empty trace".into()));
    }
    let total = records.len() as f64;

    let mut by_tech: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut tech_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut out_of_coverage = 0usize;
    let mut visible_rsrp: Vec<f64> = Vec::new();
    for rec in records {
        match &rec.technology {
            None => out_of_coverage += 1,
            Some(tech) => {
                *tech_counts.entry(tech.clone()).or_default() += 1;
                if let Some(rsrp) = rec.rsrp_dbm {
                    by_tech.entry(tech.clone()).or_default().push(rsrp);
                    visible_rsrp.push(rsrp);
                }
            }
        }
    }

    let mean_std = |values: &[f64]| -> (Option<f64>, Option<f64>) {
        if values.is_empty() {
            return (None, None);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        (Some(mean), Some(std))
    };

    let per_technology = tech_counts
        .iter()
        .map(|(tech, &count)| {
            let values = by_tech.get(tech).map(Vec::as_slice).unwrap_or(&[]);
            let (mean, std) = mean_std(values);
            let below = (!values.is_empty()).then(|| {
                values.iter().filter(|&&v| v < critical_dbm).count() as f64 / values.len() as f64 * 100.0
            });
            (
                tech.clone(),
                TechnologyCoverage {
                    availability_pct: count as f64 / total * 100.0,
                    rsrp_mean_dbm: mean,
                    rsrp_std_db: std,
                    below_critical_pct: below,
                },
            )
        })
        .collect();

    let below_critical_pct = (!visible_rsrp.is_empty()).then(|| {
        visible_rsrp.iter().filter(|&&v| v < critical_dbm).count() as f64 / visible_rsrp.len() as f64 * 100.0
    });

    Ok(CoverageStats {
        records: records.len(),
        critical_dbm,
        per_technology,
        out_of_coverage_pct: out_of_coverage as f64 / total * 100.0,
        below_critical_pct,
    })
}
