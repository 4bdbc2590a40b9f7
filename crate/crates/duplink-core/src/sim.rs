//! Deterministic event-driven emulation of measurement campaigns.
//!
//! Time is integer nanoseconds and the event queue breaks timestamp ties by
//! `(event class, link name, seq)`, so a campaign is a pure function of
//! `(profiles, policy, config, seed)`: the same inputs give a byte-identical
//! event log on any platform.
//!
//! Probes model the duplicated echo procedure: every copy of a request that
//! reaches the far side is echoed back on the link it arrived on, and the
//! near side keeps the first reply per sequence number. The accepted round
//! trip therefore equals the minimum over per-link round trips, which is
//! exactly how duplication picks the fastest usable path.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::accounting::{on_copy_arrival, LinkShareAccounting};
use crate::campaign::{bin_deliveries, max_over_links, series_meta, LoadConfig, LoadDirection, LoadRun, ProbeConfig, ProbeRun};
use crate::dedup::DedupState;
use crate::error::{ConfigError, Result};
use crate::link::{frame_bits, ChannelDir, DropReason, Link, LinkProfile, RsrpTrace, Transmit};
use crate::policy::{DuplicationPolicy, PolicyEngine};
use crate::series::{MetricKind, SamplePoint, SampleSeries};

/// Label used for multi-connectivity series.
pub const MC_LABEL: &str = "mc";

/// One entry in the ordered event log. Links are referenced by index into
/// [`EventLog::links`].
#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogRecord {
    Send { t_ns: u64, link: u32, flow: u32, seq: u64, bits: u64 },
    Drop { t_ns: u64, link: u32, flow: u32, seq: u64, dir: ChannelDir, reason: DropReason },
    Deliver { t_ns: u64, sent_ns: u64, link: u32, flow: u32, seq: u64, dir: ChannelDir },
    ProbeResolved { seq: u64, sent_ns: u64, rtt_ns: Option<u64>, via: Option<u32> },
}

#[derive(Debug, Clone, Default)]
pub struct EventLog {
    pub links: Vec<String>,
    pub records: Vec<LogRecord>,
}

impl EventLog {
    pub fn new(links: Vec<String>) -> Self {
        Self { links, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// JSON-lines rendering: a header object, then one record per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&serde_json::json!({ "links": self.links }))?);
        out.push('\n');
        for record in &self.records {
            out.push_str(&serde_json::to_string(record)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_jsonl(&self, path: &std::path::Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::File::create(path)?.write_all(self.to_jsonl()?.as_bytes())?;
        Ok(())
    }
}

/// Event classes, ordered within one timestamp. Arrivals sort before
/// timeouts so a reply landing exactly at the threshold still counts.
const CLASS_SEND: u8 = 0;
const CLASS_UP: u8 = 1;
const CLASS_DOWN: u8 = 2;
const CLASS_TIMEOUT: u8 = 3;

#[derive(Debug, PartialEq, Eq)]
struct QEvent {
    t_ns: u64,
    class: u8,
    link_rank: u32,
    seq: u64,
    link: usize,
}

impl Ord for QEvent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.t_ns, self.class, self.link_rank, self.seq).cmp(&(
            other.t_ns,
            other.class,
            other.link_rank,
            other.seq,
        ))
    }
}

impl PartialOrd for QEvent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A set of instantiated links plus the duplication policy driving them.
/// Build one per campaign: the `campaign` tag namespaces the random streams
/// so latency and load drives on the same seed stay independent.
pub struct EmulatedNetwork {
    links: Vec<Link>,
    names: Vec<String>,
    /// Lexicographic rank of each link name, for tie-breaking.
    ranks: Vec<u32>,
    policy: PolicyEngine,
    seed: u64,
    pub scenario_name: Option<String>,
}

impl EmulatedNetwork {
    pub fn new(
        profiles: &[LinkProfile],
        policy: DuplicationPolicy,
        seed: u64,
        campaign: &str,
        traces: &BTreeMap<String, Arc<RsrpTrace>>,
    ) -> Result<Self> {
        let mut problems: Vec<String> = Vec::new();
        let names: Vec<String> = profiles.iter().map(|p| p.name.clone()).collect();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                problems.push(format!("duplicate link name {name:?}"));
            }
        }
        for profile in profiles {
            problems.extend(profile.problems());
            if matches!(profile.outage, crate::link::OutageSpec::RsrpTrace { .. })
                && !traces.contains_key(&profile.name)
            {
                problems.push(format!("link {:?}: rsrp-trace outage has no loaded trace", profile.name));
            }
        }
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems).into());
        }
        let links = profiles
            .iter()
            .map(|p| Link::from_profile(p, seed, campaign, traces.get(&p.name).cloned()))
            .collect::<Result<Vec<_>>>()?;
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        let ranks = names
            .iter()
            .map(|n| sorted.iter().position(|s| *s == n).unwrap() as u32)
            .collect();
        let policy = PolicyEngine::new(policy, &names)?;
        Ok(Self { links, names, ranks, policy, seed, scenario_name: None })
    }

    pub fn link_names(&self) -> &[String] {
        &self.names
    }

    pub fn policy(&self) -> &PolicyEngine {
        &self.policy
    }

    fn meta_for(
        &self,
        metric: MetricKind,
        label: &str,
        config: serde_json::Value,
    ) -> crate::series::SeriesMetadata {
        series_meta(
            metric,
            label,
            self.scenario_name.as_deref(),
            Some(self.policy.policy().label()),
            Some(self.seed),
            config,
            true,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CopyState {
    NotSent,
    InFlight,
    Lost,
    Arrived { rtt_ns: u64 },
}

/// Runs the periodic echo-probe procedure over the emulated links.
pub fn probe_campaign(net: &mut EmulatedNetwork, cfg: &ProbeConfig, duration_s: f64) -> Result<ProbeRun> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems).into());
    }
    let n = cfg.probe_count(cfg.effective_duration(duration_s)) as usize;
    let n_links = net.links.len();
    let interval_ns = cfg.interval_ms * 1_000_000;
    let threshold_ns = cfg.outage_threshold_ms * 1_000_000;
    let payload_bits = frame_bits(cfg.payload_bytes);
    let flow: u32 = 0;

    let mut copies = vec![vec![CopyState::NotSent; n_links]; n];
    let mut resolved = vec![false; n];
    let mut accepted_rtt_ns: Vec<Option<u64>> = vec![None; n];
    let mut dedup = DedupState::new();
    let mut accounting = LinkShareAccounting::new(&net.names);
    let mut log = EventLog::new(net.names.clone());
    let mut violations: Vec<String> = Vec::new();

    let mut heap: BinaryHeap<Reverse<QEvent>> = BinaryHeap::with_capacity(n * 2);
    for k in 0..n as u64 {
        heap.push(Reverse(QEvent { t_ns: k * interval_ns, class: CLASS_SEND, link_rank: 0, seq: k, link: 0 }));
    }

    while let Some(Reverse(ev)) = heap.pop() {
        let k = ev.seq as usize;
        let sent_ns = ev.seq * interval_ns;
        match ev.class {
            CLASS_SEND => {
                for i in net.policy.select() {
                    log.records.push(LogRecord::Send { t_ns: ev.t_ns, link: i as u32, flow, seq: ev.seq, bits: payload_bits });
                    match net.links[i].up.transmit(ev.t_ns, payload_bits, false)? {
                        Transmit::Dropped { reason } => {
                            copies[k][i] = CopyState::Lost;
                            log.records.push(LogRecord::Drop { t_ns: ev.t_ns, link: i as u32, flow, seq: ev.seq, dir: ChannelDir::Up, reason });
                        }
                        Transmit::Deliver { at_ns } => {
                            copies[k][i] = CopyState::InFlight;
                            heap.push(Reverse(QEvent { t_ns: at_ns, class: CLASS_UP, link_rank: net.ranks[i], seq: ev.seq, link: i }));
                        }
                    }
                }
                heap.push(Reverse(QEvent { t_ns: ev.t_ns + threshold_ns, class: CLASS_TIMEOUT, link_rank: 0, seq: ev.seq, link: 0 }));
            }
            CLASS_UP => {
                let i = ev.link;
                log.records.push(LogRecord::Deliver { t_ns: ev.t_ns, sent_ns, link: i as u32, flow, seq: ev.seq, dir: ChannelDir::Up });
                // Echo this copy back on its ingress link.
                match net.links[i].down.transmit(ev.t_ns, payload_bits, false)? {
                    Transmit::Dropped { reason } => {
                        copies[k][i] = CopyState::Lost;
                        log.records.push(LogRecord::Drop { t_ns: ev.t_ns, link: i as u32, flow, seq: ev.seq, dir: ChannelDir::Down, reason });
                    }
                    Transmit::Deliver { at_ns } => {
                        heap.push(Reverse(QEvent { t_ns: at_ns, class: CLASS_DOWN, link_rank: net.ranks[i], seq: ev.seq, link: i }));
                    }
                }
            }
            CLASS_DOWN => {
                let i = ev.link;
                if ev.t_ns < sent_ns {
                    violations.push(format!("causality: probe {} reply at {} before send {}", ev.seq, ev.t_ns, sent_ns));
                }
                let rtt_ns = ev.t_ns.saturating_sub(sent_ns);
                copies[k][i] = CopyState::Arrived { rtt_ns };
                log.records.push(LogRecord::Deliver { t_ns: ev.t_ns, sent_ns, link: i as u32, flow, seq: ev.seq, dir: ChannelDir::Down });
                net.policy.observe_rtt(i, rtt_ns as f64 / 1e6);
                if !resolved[k] && on_copy_arrival(&mut dedup, &mut accounting, i, flow, ev.seq).is_accept() {
                    resolved[k] = true;
                    accepted_rtt_ns[k] = Some(rtt_ns);
                    log.records.push(LogRecord::ProbeResolved { seq: ev.seq, sent_ns, rtt_ns: Some(rtt_ns), via: Some(i as u32) });
                }
            }
            CLASS_TIMEOUT => {
                if !resolved[k] {
                    resolved[k] = true;
                    log.records.push(LogRecord::ProbeResolved { seq: ev.seq, sent_ns, rtt_ns: None, via: None });
                    for i in 0..n_links {
                        if copies[k][i] != CopyState::NotSent {
                            net.policy.observe_timeout(i, cfg.outage_threshold_ms as f64);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    let cfg_json = serde_json::to_value(cfg)?;
    let interval_s = cfg.interval_ms as f64 / 1e3;
    let mc_points: Vec<SamplePoint> = (0..n)
        .map(|k| match accepted_rtt_ns[k] {
            Some(rtt_ns) => SamplePoint { t_s: k as f64 * interval_s, value: Some(rtt_ns as f64 / 1e6), outage: false },
            None => SamplePoint { t_s: k as f64 * interval_s, value: None, outage: true },
        })
        .collect();
    let mc = SampleSeries::new(net.meta_for(MetricKind::RttMs, MC_LABEL, cfg_json.clone()), mc_points)?;

    let threshold_ms = cfg.outage_threshold_ms as f64;
    let mut per_link = Vec::with_capacity(n_links);
    for i in 0..n_links {
        let points: Vec<SamplePoint> = (0..n)
            .filter_map(|k| {
                let t_s = k as f64 * interval_s;
                match copies[k][i] {
                    CopyState::NotSent => None,
                    CopyState::Lost | CopyState::InFlight => Some(SamplePoint { t_s, value: None, outage: true }),
                    CopyState::Arrived { rtt_ns } => {
                        let ms = rtt_ns as f64 / 1e6;
                        Some(SamplePoint { t_s, value: Some(ms), outage: ms > threshold_ms })
                    }
                }
            })
            .collect();
        per_link.push(SampleSeries::new(net.meta_for(MetricKind::RttMs, &net.names[i], cfg_json.clone()), points)?);
    }

    Ok(ProbeRun { mc, per_link, shares: accounting.to_shares(), events: log, violations })
}

/// Runs the constant-rate load procedure. Each selected link carries an
/// independent full-rate flow; the multi-connectivity series takes the best
/// link per bin rather than summing redundant copies.
pub fn load_campaign(net: &mut EmulatedNetwork, cfg: &LoadConfig, duration_s: f64, log_events: bool) -> Result<LoadRun> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems).into());
    }
    let duration = cfg.effective_duration(duration_s);
    let n = cfg.frame_count(duration);
    let payload_bits = (cfg.payload_bytes * 8) as u64;
    let selected = net.policy.select();
    let dir = match cfg.direction {
        LoadDirection::Ul => ChannelDir::Up,
        LoadDirection::Dl => ChannelDir::Down,
    };

    let mut deliveries: Vec<Vec<(u64, u64)>> = vec![Vec::new(); net.links.len()];
    let mut log = EventLog::new(net.names.clone());
    let violations: Vec<String> = Vec::new();

    for k in 0..n {
        let t_ns = cfg.send_ns(k);
        for &i in &selected {
            let flow = i as u32;
            if log_events {
                log.records.push(LogRecord::Send { t_ns, link: i as u32, flow, seq: k, bits: payload_bits });
            }
            let channel = match dir {
                ChannelDir::Up => &mut net.links[i].up,
                ChannelDir::Down => &mut net.links[i].down,
            };
            match channel.transmit(t_ns, payload_bits, true)? {
                Transmit::Dropped { reason } => {
                    if log_events {
                        log.records.push(LogRecord::Drop { t_ns, link: i as u32, flow, seq: k, dir, reason });
                    }
                }
                Transmit::Deliver { at_ns } => {
                    deliveries[i].push((at_ns, payload_bits));
                    if log_events {
                        log.records.push(LogRecord::Deliver { t_ns: at_ns, sent_ns: t_ns, link: i as u32, flow, seq: k, dir });
                    }
                }
            }
        }
    }

    let cfg_json = serde_json::to_value(cfg)?;
    let mut per_link_bins = Vec::new();
    let mut per_link = Vec::new();
    for &i in &selected {
        let bins = bin_deliveries(&deliveries[i], duration, cfg.bin_s, cfg.outage_threshold_kbps);
        per_link.push(SampleSeries::new(
            net.meta_for(MetricKind::ThroughputMbps, &net.names[i], cfg_json.clone()),
            bins.clone(),
        )?);
        per_link_bins.push(bins);
    }
    let mc_bins = max_over_links(&per_link_bins, cfg.outage_threshold_kbps);
    let mc = SampleSeries::new(net.meta_for(MetricKind::ThroughputMbps, MC_LABEL, cfg_json), mc_bins)?;

    Ok(LoadRun { mc, per_link, events: log, violations })
}
