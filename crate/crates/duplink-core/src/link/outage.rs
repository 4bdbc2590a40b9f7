//! Link outage processes.

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rsrp::RsrpTrace;
use crate::error::{Error, Result};

/// Outage behaviour of a link, as configured.
///
/// `RsrpTrace` maps recorded signal strength to outage: the link is down
/// whenever the most recent record is below the critical threshold or shows
/// no coverage at all.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OutageSpec {
    #[default]
    None,
    Scheduled {
        /// Disjoint, sorted `[start, end)` windows in seconds.
        windows_s: Vec<(f64, f64)>,
    },
    GilbertElliott {
        p_good_to_bad: f64,
        p_bad_to_good: f64,
        tick_s: f64,
    },
    RsrpTrace {
        threshold_dbm: f64,
        /// Trace CSV, resolved relative to the scenario file.
        #[serde(skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
}

impl OutageSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        match self {
            OutageSpec::None => {}
            OutageSpec::Scheduled { windows_s } => {
                let mut prev_end = f64::NEG_INFINITY;
                for &(start, end) in windows_s {
                    if !(start.is_finite() && end.is_finite()) || start >= end {
                        return Err(format!("window [{start}, {end}) invalid"));
                    }
                    if start < prev_end {
                        return Err(format!("window [{start}, {end}) overlaps or is out of order"));
                    }
                    prev_end = end;
                }
            }
            OutageSpec::GilbertElliott { p_good_to_bad, p_bad_to_good, tick_s } => {
                for p in [p_good_to_bad, p_bad_to_good] {
                    if !(0.0..=1.0).contains(p) {
                        return Err(format!("transition probability {p} outside [0, 1]"));
                    }
                }
                if !tick_s.is_finite() || *tick_s <= 0.0 {
                    return Err(format!("tick {tick_s} must be > 0"));
                }
            }
            OutageSpec::RsrpTrace { threshold_dbm, .. } => {
                if !threshold_dbm.is_finite() {
                    return Err("threshold must be finite".into());
                }
            }
        }
        Ok(())
    }
}

/// Instantiated outage process with its own chain state.
///
/// Queries must come with non-decreasing time for the Gilbert-Elliott
/// variant; the simulation's event order guarantees that.
#[derive(Debug)]
pub struct OutageProcess {
    state: State,
}

#[derive(Debug)]
enum State {
    None,
    Scheduled(Vec<(f64, f64)>),
    Ge { p_good_to_bad: f64, p_bad_to_good: f64, tick_s: f64, bad: bool, next_tick: u64, rng: ChaCha8Rng },
    Trace { threshold_dbm: f64, trace: Arc<RsrpTrace> },
}

impl OutageProcess {
    pub fn from_spec(spec: &OutageSpec, trace: Option<Arc<RsrpTrace>>, rng: ChaCha8Rng) -> Result<Self> {
        spec.validate().map_err(|e| Error::Trace(format!("outage spec: {e}")))?;
        let state = match spec {
            OutageSpec::None => State::None,
            OutageSpec::Scheduled { windows_s } => State::Scheduled(windows_s.clone()),
            OutageSpec::GilbertElliott { p_good_to_bad, p_bad_to_good, tick_s } => State::Ge {
                p_good_to_bad: *p_good_to_bad,
                p_bad_to_good: *p_bad_to_good,
                tick_s: *tick_s,
                bad: false,
                next_tick: 1,
                rng,
            },
            OutageSpec::RsrpTrace { threshold_dbm, .. } => {
                let trace = trace.ok_or_else(|| {
                    Error::Config(crate::error::ConfigError::Unresolved(
                        "rsrp-trace outage requires a loaded trace".into(),
                    ))
                })?;
                State::Trace { threshold_dbm: *threshold_dbm, trace }
            }
        };
        Ok(Self { state })
    }

    /// Whether the link is in outage at `t_s`.
    pub fn active(&mut self, t_s: f64) -> Result<bool> {
        match &mut self.state {
            State::None => Ok(false),
            State::Scheduled(windows) => {
                let idx = windows.partition_point(|&(start, _)| start <= t_s);
                Ok(idx > 0 && t_s < windows[idx - 1].1)
            }
            State::Ge { p_good_to_bad, p_bad_to_good, tick_s, bad, next_tick, rng } => {
                let tick = (t_s / *tick_s).floor().max(0.0) as u64;
                while *next_tick <= tick {
                    let u: f64 = rng.gen();
                    if *bad {
                        if u < *p_bad_to_good {
                            *bad = false;
                        }
                    } else if u < *p_good_to_bad {
                        *bad = true;
                    }
                    *next_tick += 1;
                }
                Ok(*bad)
            }
            State::Trace { threshold_dbm, trace } => {
                let rec = trace.latest_at(t_s)?;
                Ok(!rec.in_coverage() || rec.rsrp_dbm.map_or(true, |v| v < *threshold_dbm))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::rsrp::RsrpRecord;
    use rand::SeedableRng;

    fn process(spec: OutageSpec) -> OutageProcess {
        OutageProcess::from_spec(&spec, None, ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn empty_schedule_is_never_active() {
        let mut p = process(OutageSpec::Scheduled { windows_s: vec![] });
        for t in [0.0, 100.0, 1e6] {
            assert!(!p.active(t).unwrap());
        }
    }

    #[test]
    fn scheduled_window_is_half_open() {
        let mut p = process(OutageSpec::Scheduled { windows_s: vec![(10.0, 20.0)] });
        assert!(!p.active(9.999).unwrap());
        assert!(p.active(10.0).unwrap());
        assert!(p.active(15.0).unwrap());
        assert!(!p.active(20.0).unwrap());
    }

    #[test]
    fn overlapping_windows_rejected() {
        let spec = OutageSpec::Scheduled { windows_s: vec![(0.0, 5.0), (4.0, 6.0)] };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn gilbert_elliott_long_run_fraction_tracks_stationary_distribution() {
        let spec = OutageSpec::GilbertElliott { p_good_to_bad: 0.02, p_bad_to_good: 0.2, tick_s: 1.0 };
        let mut p = process(spec);
        let mut bad = 0u32;
        let n = 200_000;
        for t in 0..n {
            bad += p.active(t as f64).unwrap() as u32;
        }
        // Stationary bad fraction = p_gb / (p_gb + p_bg) = 0.0909...
        let frac = bad as f64 / n as f64;
        assert!((frac - 0.0909).abs() < 0.01, "bad fraction {frac}");
    }

    #[test]
    fn trace_below_threshold_is_outage() {
        let trace = Arc::new(
            RsrpTrace::new(vec![
                RsrpRecord { time_s: 0.0, rsrp_dbm: Some(-90.0), technology: Some("4g".into()), lat: None, lon: None },
                RsrpRecord { time_s: 5.0, rsrp_dbm: Some(-105.0), technology: Some("4g".into()), lat: None, lon: None },
                RsrpRecord { time_s: 10.0, rsrp_dbm: None, technology: None, lat: None, lon: None },
            ])
            .unwrap(),
        );
        let spec = OutageSpec::RsrpTrace { threshold_dbm: -100.0, path: None };
        let mut p = OutageProcess::from_spec(&spec, Some(trace), ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(!p.active(0.0).unwrap());
        assert!(p.active(5.0).unwrap());
        assert!(p.active(12.0).unwrap(), "no technology means outage");
        assert!(p.active(-1.0).is_err(), "before first record");
    }

    #[test]
    fn trace_outage_fraction_matches_record_fraction() {
        // 0.2% of records show no coverage; sampling each second reproduces it.
        let mut records = Vec::new();
        for i in 0..10_000 {
            let covered = i % 500 != 0;
            records.push(RsrpRecord {
                time_s: i as f64,
                rsrp_dbm: covered.then_some(-85.0),
                technology: covered.then(|| "4g".to_string()),
                lat: None,
                lon: None,
            });
        }
        let spec = OutageSpec::RsrpTrace { threshold_dbm: -100.0, path: None };
        let mut p =
            OutageProcess::from_spec(&spec, Some(Arc::new(RsrpTrace::new(records).unwrap())), ChaCha8Rng::seed_from_u64(1))
                .unwrap();
        let mut outages = 0u32;
        for i in 0..10_000 {
            outages += p.active(i as f64 + 0.5).unwrap() as u32;
        }
        let pct = outages as f64 / 10_000.0 * 100.0;
        assert!((pct - 0.2).abs() < 0.05, "outage {pct}%");
    }
}
