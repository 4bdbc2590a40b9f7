//! The two measurement procedures and their configuration: periodic RTT
//! probing and constant-rate datagram load. Both run over emulated links
//! ([`crate::sim`]) or live sockets ([`crate::tunnel`]) and produce the same
//! [`SampleSeries`] shape either way.

use serde::{Deserialize, Serialize};

use crate::accounting::LinkShares;
use crate::series::{MetricKind, SamplePoint, SampleSeries};
use crate::sim::EventLog;

fn d_interval() -> u64 {
    100
}
fn d_payload() -> usize {
    64
}
fn d_rtt_outage() -> u64 {
    2_000
}
fn d_target() -> f64 {
    100.0
}
fn d_bin() -> f64 {
    1.0
}
fn d_tp_outage() -> f64 {
    500.0
}
fn d_load_payload() -> usize {
    1_200
}

/// Periodic round-trip probing: one small frame per interval, a reply echoes
/// it back, and anything slower than the outage threshold counts as a
/// service outage rather than a latency sample.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProbeConfig {
    #[serde(default = "d_interval")]
    pub interval_ms: u64,
    #[serde(default = "d_payload")]
    pub payload_bytes: usize,
    #[serde(default = "d_rtt_outage")]
    pub outage_threshold_ms: u64,
    /// Defaults to the scenario duration when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            interval_ms: d_interval(),
            payload_bytes: d_payload(),
            outage_threshold_ms: d_rtt_outage(),
            duration_s: None,
        }
    }
}

impl ProbeConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.interval_ms == 0 {
            out.push("probe interval must be > 0".into());
        }
        if self.outage_threshold_ms <= self.interval_ms {
            out.push(format!(
                "probe outage threshold {} ms must exceed the interval {} ms",
                self.outage_threshold_ms, self.interval_ms
            ));
        }
        if self.payload_bytes > crate::frame::MAX_PAYLOAD {
            out.push(format!("probe payload {} exceeds the frame maximum", self.payload_bytes));
        }
        if let Some(d) = self.duration_s {
            if !(d > 0.0) {
                out.push(format!("probe duration {d} must be > 0"));
            }
        }
        out
    }

    pub fn effective_duration(&self, scenario_duration_s: f64) -> f64 {
        self.duration_s.unwrap_or(scenario_duration_s)
    }

    /// Number of probes in a run: `floor(duration / interval)`.
    pub fn probe_count(&self, duration_s: f64) -> u64 {
        (duration_s * 1_000.0 / self.interval_ms as f64).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadDirection {
    Dl,
    Ul,
}

impl std::fmt::Display for LoadDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LoadDirection::Dl => "dl",
            LoadDirection::Ul => "ul",
        })
    }
}

/// Constant-rate datagram load: the sender paces fixed-size frames at the
/// target rate and the receiver buckets delivered payload bits into
/// fixed-width bins. Bins below the outage threshold stay in the series with
/// their value, flagged as outage.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LoadConfig {
    #[serde(default = "d_target")]
    pub target_mbps: f64,
    #[serde(default = "d_bin")]
    pub bin_s: f64,
    #[serde(default = "d_tp_outage")]
    pub outage_threshold_kbps: f64,
    pub direction: LoadDirection,
    #[serde(default = "d_load_payload")]
    pub payload_bytes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl LoadConfig {
    pub fn new(direction: LoadDirection) -> Self {
        Self {
            target_mbps: d_target(),
            bin_s: d_bin(),
            outage_threshold_kbps: d_tp_outage(),
            direction,
            payload_bytes: d_load_payload(),
            duration_s: None,
        }
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.target_mbps > 0.0) {
            out.push(format!("load target {} must be > 0", self.target_mbps));
        }
        if !(self.bin_s > 0.0) {
            out.push(format!("load bin {} must be > 0", self.bin_s));
        }
        if self.outage_threshold_kbps < 0.0 {
            out.push("load outage threshold must be >= 0".into());
        }
        if self.payload_bytes == 0 || self.payload_bytes > crate::frame::MAX_PAYLOAD {
            out.push(format!("load payload {} outside the frame limits", self.payload_bytes));
        }
        if let Some(d) = self.duration_s {
            if !(d > 0.0) {
                out.push(format!("load duration {d} must be > 0"));
            }
        }
        out
    }

    pub fn effective_duration(&self, scenario_duration_s: f64) -> f64 {
        self.duration_s.unwrap_or(scenario_duration_s)
    }

    pub fn frame_count(&self, duration_s: f64) -> u64 {
        (duration_s * self.target_mbps * 1e6 / (self.payload_bytes as f64 * 8.0)).floor() as u64
    }

    /// Send time of frame `k`, drift-free pacing at the target rate.
    pub fn send_ns(&self, k: u64) -> u64 {
        (k as f64 * self.payload_bytes as f64 * 8.0 * 1e3 / self.target_mbps).round() as u64
    }

    pub fn bin_count(&self, duration_s: f64) -> u64 {
        (duration_s / self.bin_s).floor() as u64
    }
}

/// Result of one probe campaign: the multi-connectivity series seen through
/// first-arrival selection, the per-link series behind it, and which link won
/// each probe.
#[derive(Debug)]
pub struct ProbeRun {
    pub mc: SampleSeries,
    pub per_link: Vec<SampleSeries>,
    pub shares: LinkShares,
    pub events: EventLog,
    pub violations: Vec<String>,
}

/// Result of one load campaign. The multi-connectivity series takes, per
/// bin, the best rate any single link delivered with independent full-rate
/// flows on each link — redundant copies are not summed.
#[derive(Debug)]
pub struct LoadRun {
    pub mc: SampleSeries,
    pub per_link: Vec<SampleSeries>,
    pub events: EventLog,
    pub violations: Vec<String>,
}

/// Buckets delivered `(at_ns, payload_bits)` into `bin_s`-wide bins starting
/// at the first delivery. Produces exactly `floor(duration / bin)` bins, all
/// retained; starved bins are flagged, not dropped.
pub fn bin_deliveries(
    deliveries: &[(u64, u64)],
    duration_s: f64,
    bin_s: f64,
    outage_threshold_kbps: f64,
) -> Vec<SamplePoint> {
    let n_bins = (duration_s / bin_s).floor() as usize;
    if n_bins == 0 {
        return Vec::new();
    }
    let origin_ns = deliveries.iter().map(|&(at, _)| at).min().unwrap_or(0);
    let bin_ns = (bin_s * 1e9).round() as u64;
    let mut bits = vec![0u64; n_bins];
    for &(at_ns, payload_bits) in deliveries {
        let idx = ((at_ns - origin_ns) / bin_ns) as usize;
        if idx < n_bins {
            bits[idx] += payload_bits;
        }
    }
    bits.iter()
        .enumerate()
        .map(|(k, &b)| {
            let mbps = b as f64 / bin_s / 1e6;
            SamplePoint {
                t_s: (origin_ns + k as u64 * bin_ns) as f64 / 1e9,
                value: Some(mbps),
                outage: mbps < outage_threshold_kbps / 1e3,
            }
        })
        .collect()
}

/// Per-bin best single link: the multi-connectivity throughput rule.
pub fn max_over_links(per_link_bins: &[Vec<SamplePoint>], outage_threshold_kbps: f64) -> Vec<SamplePoint> {
    let n = per_link_bins.iter().map(|b| b.len()).max().unwrap_or(0);
    (0..n)
        .map(|k| {
            let best = per_link_bins
                .iter()
                .filter_map(|bins| bins.get(k).and_then(|p| p.value))
                .fold(0.0f64, f64::max);
            let t_s = per_link_bins
                .iter()
                .filter_map(|bins| bins.get(k).map(|p| p.t_s))
                .fold(f64::INFINITY, f64::min);
            SamplePoint { t_s, value: Some(best), outage: best < outage_threshold_kbps / 1e3 }
        })
        .collect()
}

pub(crate) fn series_meta(
    metric: MetricKind,
    label: &str,
    scenario: Option<&str>,
    policy: Option<&str>,
    seed: Option<u64>,
    config: serde_json::Value,
    reproducible: bool,
) -> crate::series::SeriesMetadata {
    crate::series::SeriesMetadata {
        metric: Some(metric),
        label: label.to_string(),
        scenario: scenario.map(String::from),
        policy: policy.map(String::from),
        seed,
        config: Some(config),
        reproducible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_hour_run_at_100ms_gives_72000_probes() {
        let cfg = ProbeConfig::default();
        assert_eq!(cfg.probe_count(7_200.0), 72_000);
    }

    #[test]
    fn probe_validation_catches_threshold_below_interval() {
        let cfg = ProbeConfig { interval_ms: 3_000, ..Default::default() };
        assert!(!cfg.problems().is_empty());
        assert!(ProbeConfig::default().problems().is_empty());
    }

    #[test]
    fn load_pacing_is_exact_at_round_rates() {
        let cfg = LoadConfig::new(LoadDirection::Dl);
        // 1,200-byte payloads at 100 Mbps: one frame every 96 us.
        assert_eq!(cfg.send_ns(1), 96_000);
        assert_eq!(cfg.send_ns(10_000), 960_000_000);
        assert_eq!(cfg.frame_count(60.0), 625_000);
        assert_eq!(cfg.bin_count(60.0), 60);
    }

    #[test]
    fn binning_counts_bits_per_window() {
        // Two bins of one second; 1 Mbit lands in the first, 2 in the second.
        let mut deliveries = Vec::new();
        for k in 0..100 {
            deliveries.push((k * 10_000_000, 10_000));
        }
        for k in 0..200 {
            deliveries.push((1_000_000_000 + k * 5_000_000, 10_000));
        }
        let bins = bin_deliveries(&deliveries, 2.0, 1.0, 500.0);
        assert_eq!(bins.len(), 2);
        assert_eq!(bins[0].value, Some(1.0));
        assert_eq!(bins[1].value, Some(2.0));
        assert!(!bins[0].outage);
    }

    #[test]
    fn blackout_bin_is_zero_and_flagged() {
        let deliveries = vec![(0u64, 800_000u64), (2_000_000_000, 800_000)];
        let bins = bin_deliveries(&deliveries, 3.0, 1.0, 500.0);
        assert_eq!(bins[1].value, Some(0.0));
        assert!(bins[1].outage);
        assert!(!bins[0].outage);
    }

    #[test]
    fn mc_bins_take_the_best_link() {
        let a = vec![
            SamplePoint { t_s: 0.0, value: Some(10.0), outage: false },
            SamplePoint { t_s: 1.0, value: Some(0.1), outage: true },
        ];
        let b = vec![
            SamplePoint { t_s: 0.0, value: Some(4.0), outage: false },
            SamplePoint { t_s: 1.0, value: Some(6.0), outage: false },
        ];
        let mc = max_over_links(&[a, b], 500.0);
        assert_eq!(mc[0].value, Some(10.0));
        assert_eq!(mc[1].value, Some(6.0));
        assert!(!mc[1].outage);
    }
}
