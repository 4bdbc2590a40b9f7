//! Signal-strength traces recorded along a drive route.
//!
//! A trace is a time-ordered log of the technology currently serving one
//! operator's modem and the RSRP it saw, with `none` rows where the modem had
//! no coverage at all. Traces drive both coverage statistics and the
//! trace-driven outage process of an emulated link.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Conventional threshold below which a cellular link is considered too weak
/// to carry service.
pub const DEFAULT_CRITICAL_RSRP_DBM: f64 = -100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RsrpRecord {
    pub time_s: f64,
    /// Absent when out of coverage.
    pub rsrp_dbm: Option<f64>,
    /// Serving technology tag, e.g. `4g` or `5g`; `None` when out of coverage.
    pub technology: Option<String>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

impl RsrpRecord {
    pub fn in_coverage(&self) -> bool {
        self.technology.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct RsrpTrace {
    records: Vec<RsrpRecord>,
}

impl RsrpTrace {
    /// Record times must increase strictly.
    pub fn new(records: Vec<RsrpRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Trace("empty trace".into()));
        }
        for pair in records.windows(2) {
            if pair[1].time_s <= pair[0].time_s {
                return Err(Error::Trace(format!(
                    "record times must increase strictly ({} after {})",
                    pair[1].time_s, pair[0].time_s
                )));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[RsrpRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start_s(&self) -> f64 {
        self.records[0].time_s
    }

    pub fn end_s(&self) -> f64 {
        self.records.last().unwrap().time_s
    }

    /// Most recent record at or before `t_s`; error before the first record.
    pub fn latest_at(&self, t_s: f64) -> Result<&RsrpRecord> {
        let idx = self.records.partition_point(|r| r.time_s <= t_s);
        if idx == 0 {
            return Err(Error::Trace(format!(
                "time {t_s} precedes the first trace record at {}",
                self.start_s()
            )));
        }
        Ok(&self.records[idx - 1])
    }

    /// Loads `time_s,rsrp_dbm,tech,lat,lon` CSV; lat/lon columns optional,
    /// empty or `none` tech means out of coverage.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() < 3 {
                return Err(Error::Trace(format!("row has {} columns, need at least 3", row.len())));
            }
            let time_s: f64 = row[0]
                .parse()
                .map_err(|e| Error::Trace(format!("bad time {:?}: {e}", &row[0])))?;
            let rsrp_dbm = if row[1].is_empty() {
                None
            } else {
                Some(row[1].parse().map_err(|e| Error::Trace(format!("bad rsrp {:?}: {e}", &row[1])))?)
            };
            let technology = match &row[2] {
                t if t.is_empty() || t.eq_ignore_ascii_case("none") => None,
                t => Some(t.to_ascii_lowercase()),
            };
            let parse_opt = |i: usize| -> Result<Option<f64>> {
                match row.get(i) {
                    None | Some("") => Ok(None),
                    Some(s) => Ok(Some(
                        s.parse().map_err(|e| Error::Trace(format!("bad coordinate {s:?}: {e}")))?,
                    )),
                }
            };
            records.push(RsrpRecord { time_s, rsrp_dbm, technology, lat: parse_opt(3)?, lon: parse_opt(4)? });
        }
        Self::new(records)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Trace(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, rsrp: Option<f64>, tech: Option<&str>) -> RsrpRecord {
        RsrpRecord { time_s: t, rsrp_dbm: rsrp, technology: tech.map(String::from), lat: None, lon: None }
    }

    #[test]
    fn rejects_non_increasing_times() {
        assert!(RsrpTrace::new(vec![rec(1.0, Some(-90.0), Some("4g")), rec(1.0, Some(-91.0), Some("4g"))]).is_err());
        assert!(RsrpTrace::new(vec![]).is_err());
    }

    #[test]
    fn latest_at_picks_most_recent() {
        let trace = RsrpTrace::new(vec![
            rec(0.0, Some(-80.0), Some("5g")),
            rec(5.0, Some(-105.0), Some("4g")),
            rec(10.0, None, None),
        ])
        .unwrap();
        assert_eq!(trace.latest_at(5.0).unwrap().rsrp_dbm, Some(-105.0));
        assert_eq!(trace.latest_at(7.5).unwrap().rsrp_dbm, Some(-105.0));
        assert!(!trace.latest_at(12.0).unwrap().in_coverage());
        assert!(trace.latest_at(-1.0).is_err());
    }

    #[test]
    fn csv_parses_optional_columns() {
        let csv = "time_s,rsrp_dbm,tech,lat,lon\n0.0,-93.5,4g,57.0,9.9\n1.0,,none,,\n2.5,-101.2,5g\n";
        let trace = RsrpTrace::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(trace.len(), 3);
        assert_eq!(trace.records()[0].lat, Some(57.0));
        assert!(!trace.records()[1].in_coverage());
        assert_eq!(trace.records()[2].technology.as_deref(), Some("5g"));
        assert_eq!(trace.records()[2].lat, None);
    }
}
