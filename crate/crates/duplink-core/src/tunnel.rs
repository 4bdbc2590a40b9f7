//! Live UDP tunnel endpoints.
//!
//! The client duplicates outbound frames across one socket per path under
//! the configured policy; the server echoes every probe copy back on the
//! path it arrived from and keeps first-arrival accounting, so the client's
//! first reply per sequence number realizes the per-path minimum round trip.
//! Real-socket captures are flagged non-reproducible in series metadata.

use std::collections::BTreeMap;
use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::accounting::{on_copy_arrival, LinkShareAccounting};
use crate::campaign::{series_meta, LoadConfig, ProbeConfig, ProbeRun};
use crate::dedup::DedupState;
use crate::error::{ConfigError, Error, Result};
use crate::frame::{FrameKind, TunnelFrame, MAX_PAYLOAD};
use crate::policy::{DuplicationPolicy, PolicyEngine};
use crate::series::{MetricKind, SamplePoint, SampleSeries};
use crate::sim::EventLog;

/// One client-side path: a local socket and the server it reaches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TunnelPath {
    pub name: String,
    /// Local bind address, e.g. `127.0.0.1:0` for an ephemeral port.
    pub bind: SocketAddr,
    pub server: SocketAddr,
    /// Artificial delay applied before each send on this path; test
    /// impairment for loopback setups.
    #[serde(default)]
    pub extra_send_delay_ms: u64,
}

impl TunnelPath {
    pub fn new(name: &str, bind: SocketAddr, server: SocketAddr) -> Self {
        Self { name: name.to_string(), bind, server, extra_send_delay_ms: 0 }
    }
}

enum PathSender {
    Direct(Arc<UdpSocket>),
    Delayed(mpsc::Sender<(Instant, Vec<u8>)>),
}

struct ClientPath {
    name: String,
    socket: Arc<UdpSocket>,
    sender: PathSender,
}

/// Duplicating tunnel client over live sockets.
pub struct TunnelClient {
    paths: Vec<ClientPath>,
    policy: PolicyEngine,
    epoch: Instant,
    stop: Arc<AtomicBool>,
    flow_id: u32,
    threads: Vec<thread::JoinHandle<()>>,
}

impl TunnelClient {
    pub fn connect(paths: &[TunnelPath], policy: DuplicationPolicy) -> Result<Self> {
        if paths.is_empty() {
            return Err(ConfigError::Invalid(vec!["tunnel needs at least one path".into()]).into());
        }
        let names: Vec<String> = paths.iter().map(|p| p.name.clone()).collect();
        let engine = PolicyEngine::new(policy, &names)?;
        let stop = Arc::new(AtomicBool::new(false));
        let mut client_paths = Vec::new();
        let mut threads = Vec::new();
        for path in paths {
            let socket = UdpSocket::bind(path.bind)
                .map_err(|e| Error::Tunnel(format!("bind {}: {e}", path.bind)))?;
            socket
                .set_read_timeout(Some(Duration::from_millis(50)))
                .map_err(|e| Error::Tunnel(format!("socket options: {e}")))?;
            let socket = Arc::new(socket);
            let sender = if path.extra_send_delay_ms == 0 {
                PathSender::Direct(socket.clone())
            } else {
                let (tx, rx) = mpsc::channel::<(Instant, Vec<u8>)>();
                let delayed_socket = socket.clone();
                let server = path.server;
                threads.push(thread::spawn(move || {
                    while let Ok((send_at, bytes)) = rx.recv() {
                        let now = Instant::now();
                        if send_at > now {
                            thread::sleep(send_at - now);
                        }
                        let _ = delayed_socket.send_to(&bytes, server);
                    }
                }));
                PathSender::Delayed(tx)
            };
            client_paths.push(ClientPath { name: path.name.clone(), socket, sender });
        }
        Ok(Self {
            paths: client_paths,
            policy: engine,
            epoch: Instant::now(),
            stop,
            flow_id: 0,
            threads,
        })
    }

    fn now_ns(&self) -> u64 {
        self.epoch.elapsed().as_nanos() as u64
    }

    fn send_on(&self, path_idx: usize, server: SocketAddr, bytes: Vec<u8>, delay: Duration) {
        match &self.paths[path_idx].sender {
            PathSender::Direct(socket) => {
                // Send errors behave like loss; the probe times out.
                let _ = socket.send_to(&bytes, server);
            }
            PathSender::Delayed(tx) => {
                let _ = tx.send((Instant::now() + delay, bytes));
            }
        }
    }

    /// Runs the periodic echo-probe procedure over live paths.
    pub fn run_probe_campaign(
        &mut self,
        cfg: &ProbeConfig,
        duration_s: f64,
        path_config: &[TunnelPath],
    ) -> Result<ProbeRun> {
        let problems = cfg.problems();
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems).into());
        }
        let n = cfg.probe_count(cfg.effective_duration(duration_s)) as usize;
        let n_paths = self.paths.len();
        let interval = Duration::from_millis(cfg.interval_ms);
        let threshold_ns = cfg.outage_threshold_ms * 1_000_000;

        let (tx, rx) = mpsc::channel::<(usize, u64, u64, u64)>();
        self.spawn_readers(tx);

        // Per (probe, path): sent flag and first observed round trip.
        let mut sent = vec![vec![false; n_paths]; n];
        let mut per_path_rtt: Vec<Vec<Option<u64>>> = vec![vec![None; n_paths]; n];
        let mut send_ns = vec![0u64; n];
        let mut resolved = vec![false; n];
        let mut accepted: Vec<Option<(u64, usize)>> = vec![None; n];
        let mut dedup = DedupState::new();
        let names: Vec<String> = self.paths.iter().map(|p| p.name.clone()).collect();
        let mut accounting = LinkShareAccounting::new(&names);

        let handle_reply = |reply: (usize, u64, u64, u64),
                                per_path_rtt: &mut Vec<Vec<Option<u64>>>,
                                resolved: &mut Vec<bool>,
                                accepted: &mut Vec<Option<(u64, usize)>>,
                                dedup: &mut DedupState,
                                accounting: &mut LinkShareAccounting,
                                policy: &mut PolicyEngine| {
            let (path_idx, seq, sent_ts_ns, recv_ns) = reply;
            let k = seq as usize;
            if k >= n || recv_ns < sent_ts_ns {
                return;
            }
            let rtt_ns = recv_ns - sent_ts_ns;
            if per_path_rtt[k][path_idx].is_none() {
                per_path_rtt[k][path_idx] = Some(rtt_ns);
                policy.observe_rtt(path_idx, rtt_ns as f64 / 1e6);
            }
            if !resolved[k]
                && rtt_ns <= threshold_ns
                && on_copy_arrival(dedup, accounting, path_idx, self.flow_id, seq).is_accept()
            {
                resolved[k] = true;
                accepted[k] = Some((rtt_ns, path_idx));
            }
        };

        let resolve_timeouts = |now_ns: u64,
                                    sent: &Vec<Vec<bool>>,
                                    per_path_rtt: &Vec<Vec<Option<u64>>>,
                                    send_ns: &Vec<u64>,
                                    resolved: &mut Vec<bool>,
                                    next_unresolved: &mut usize,
                                    policy: &mut PolicyEngine| {
            while *next_unresolved < n {
                let k = *next_unresolved;
                if sent[k].iter().all(|s| !s) && send_ns[k] == 0 && k > 0 {
                    break; // not sent yet
                }
                if resolved[k] {
                    *next_unresolved += 1;
                    continue;
                }
                if now_ns < send_ns[k] + threshold_ns {
                    break;
                }
                resolved[k] = true;
                for (path_idx, was_sent) in sent[k].iter().enumerate() {
                    if *was_sent && per_path_rtt[k][path_idx].is_none() {
                        policy.observe_timeout(path_idx, cfg.outage_threshold_ms as f64);
                    }
                }
                *next_unresolved += 1;
            }
        };
        let mut next_unresolved = 0usize;

        for k in 0..n {
            let target = self.epoch + interval * k as u32;
            loop {
                let now = Instant::now();
                if now >= target {
                    break;
                }
                if let Ok(reply) = rx.recv_timeout(target - now) {
                    handle_reply(
                        reply,
                        &mut per_path_rtt,
                        &mut resolved,
                        &mut accepted,
                        &mut dedup,
                        &mut accounting,
                        &mut self.policy,
                    );
                }
            }
            let ts = self.now_ns();
            send_ns[k] = ts;
            let frame = TunnelFrame::probe_request(self.flow_id, k as u64, ts, cfg.payload_bytes);
            let bytes = frame.encode()?;
            for path_idx in self.policy.select() {
                sent[k][path_idx] = true;
                let delay = Duration::from_millis(path_config[path_idx].extra_send_delay_ms);
                self.send_on(path_idx, path_config[path_idx].server, bytes.clone(), delay);
            }
            resolve_timeouts(ts, &sent, &per_path_rtt, &send_ns, &mut resolved, &mut next_unresolved, &mut self.policy);
        }

        // Give the last probes their full timeout window.
        let deadline = Instant::now() + Duration::from_millis(cfg.outage_threshold_ms + 100);
        while Instant::now() < deadline && !resolved.iter().all(|r| *r) {
            if let Ok(reply) = rx.recv_timeout(Duration::from_millis(20)) {
                handle_reply(
                    reply,
                    &mut per_path_rtt,
                    &mut resolved,
                    &mut accepted,
                    &mut dedup,
                    &mut accounting,
                    &mut self.policy,
                );
            }
            resolve_timeouts(self.now_ns(), &sent, &per_path_rtt, &send_ns, &mut resolved, &mut next_unresolved, &mut self.policy);
        }
        self.stop.store(true, Ordering::SeqCst);

        let cfg_json = serde_json::to_value(cfg)?;
        let meta = |label: &str| {
            series_meta(MetricKind::RttMs, label, None, Some(self.policy.policy().label()), None, cfg_json.clone(), false)
        };
        let interval_s = cfg.interval_ms as f64 / 1e3;
        let mc_points = (0..n)
            .map(|k| match accepted[k] {
                Some((rtt_ns, _)) => {
                    SamplePoint { t_s: k as f64 * interval_s, value: Some(rtt_ns as f64 / 1e6), outage: false }
                }
                None => SamplePoint { t_s: k as f64 * interval_s, value: None, outage: true },
            })
            .collect();
        let mc = SampleSeries::new(meta("mc"), mc_points)?;
        let mut per_link = Vec::new();
        for path_idx in 0..n_paths {
            let points: Vec<SamplePoint> = (0..n)
                .filter(|&k| sent[k][path_idx])
                .map(|k| {
                    let t_s = k as f64 * interval_s;
                    match per_path_rtt[k][path_idx] {
                        Some(rtt_ns) => {
                            let ms = rtt_ns as f64 / 1e6;
                            SamplePoint { t_s, value: Some(ms), outage: ms > cfg.outage_threshold_ms as f64 }
                        }
                        None => SamplePoint { t_s, value: None, outage: true },
                    }
                })
                .collect();
            per_link.push(SampleSeries::new(meta(&names[path_idx]), points)?);
        }

        Ok(ProbeRun {
            mc,
            per_link,
            shares: accounting.to_shares(),
            events: EventLog::new(names),
            violations: Vec::new(),
        })
    }

    /// Paces load frames at the target rate over the selected paths. Each
    /// path carries an independent flow; the receiving endpoint measures.
    pub fn run_load(&mut self, cfg: &LoadConfig, duration_s: f64, path_config: &[TunnelPath]) -> Result<Vec<u64>> {
        let problems = cfg.problems();
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems).into());
        }
        let n = cfg.frame_count(cfg.effective_duration(duration_s));
        let mut sent_per_path = vec![0u64; self.paths.len()];
        let payload = vec![0u8; cfg.payload_bytes.min(MAX_PAYLOAD)];
        let start = Instant::now();
        for k in 0..n {
            let target = start + Duration::from_nanos(cfg.send_ns(k));
            let now = Instant::now();
            if target > now {
                thread::sleep(target - now);
            }
            for path_idx in self.policy.select() {
                let frame = TunnelFrame::new(
                    FrameKind::Load,
                    path_idx as u32 + 1,
                    k,
                    self.now_ns(),
                    payload.clone(),
                );
                self.send_on(path_idx, path_config[path_idx].server, frame.encode()?, Duration::ZERO);
                sent_per_path[path_idx] += 1;
            }
        }
        Ok(sent_per_path)
    }

    fn spawn_readers(&mut self, tx: mpsc::Sender<(usize, u64, u64, u64)>) {
        for (path_idx, path) in self.paths.iter().enumerate() {
            let socket = path.socket.clone();
            let stop = self.stop.clone();
            let tx = tx.clone();
            let epoch = self.epoch;
            self.threads.push(thread::spawn(move || {
                let mut buf = [0u8; 2048];
                while !stop.load(Ordering::SeqCst) {
                    match socket.recv_from(&mut buf) {
                        Ok((len, _)) => {
                            if let Ok(frame) = TunnelFrame::decode(&buf[..len]) {
                                if frame.kind == FrameKind::ProbeReply {
                                    let recv_ns = epoch.elapsed().as_nanos() as u64;
                                    let _ = tx.send((path_idx, frame.seq, frame.send_ts_ns, recv_ns));
                                }
                            }
                        }
                        Err(_) => continue, // timeout or transient error
                    }
                }
            }));
        }
    }
}

impl Drop for TunnelClient {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for handle in self.threads.drain(..) {
            let _ = handle.join();
        }
    }
}

/// Aggregate view of what a server saw.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ServerStats {
    pub probe_copies_echoed: u64,
    pub accepted_frames: u64,
    pub duplicate_frames: u64,
    pub decode_errors: u64,
    /// Delivered load, per `(peer, flow)`: `(recv_ns, payload_bits)` pairs.
    pub load_deliveries: BTreeMap<String, Vec<(u64, u64)>>,
}

/// Handle to a running echo/dedup server.
pub struct ServerHandle {
    stop: Arc<AtomicBool>,
    thread: thread::JoinHandle<Result<ServerStats>>,
    pub addr: SocketAddr,
}

impl ServerHandle {
    pub fn stop(self) -> Result<ServerStats> {
        self.stop.store(true, Ordering::SeqCst);
        self.thread.join().map_err(|_| Error::Tunnel("server thread panicked".into()))?
    }
}

/// Binds and runs the tunnel server on a background thread.
///
/// Every probe-request copy is echoed back to the address it came from;
/// first-arrival bookkeeping runs across copies of the same
/// `(flow_id, seq)` regardless of ingress path.
pub fn spawn_server(bind: SocketAddr) -> Result<ServerHandle> {
    let socket = UdpSocket::bind(bind).map_err(|e| Error::Tunnel(format!("bind {bind}: {e}")))?;
    let addr = socket.local_addr().map_err(|e| Error::Tunnel(e.to_string()))?;
    socket
        .set_read_timeout(Some(Duration::from_millis(50)))
        .map_err(|e| Error::Tunnel(e.to_string()))?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = stop.clone();
    let thread = thread::spawn(move || -> Result<ServerStats> {
        let epoch = Instant::now();
        let mut stats = ServerStats::default();
        let mut dedup = DedupState::new();
        let mut buf = [0u8; 65_536];
        while !stop_flag.load(Ordering::SeqCst) {
            let (len, peer) = match socket.recv_from(&mut buf) {
                Ok(ok) => ok,
                Err(_) => continue,
            };
            let frame = match TunnelFrame::decode(&buf[..len]) {
                Ok(frame) => frame,
                Err(_) => {
                    stats.decode_errors += 1;
                    continue;
                }
            };
            if dedup.accept(frame.flow_id, frame.seq).is_accept() {
                stats.accepted_frames += 1;
            } else {
                stats.duplicate_frames += 1;
            }
            match frame.kind {
                FrameKind::ProbeRequest => {
                    let reply = frame.reply().encode()?;
                    if socket.send_to(&reply, peer).is_ok() {
                        stats.probe_copies_echoed += 1;
                    }
                }
                FrameKind::Load => {
                    let key = format!("{peer}/{}", frame.flow_id);
                    let recv_ns = epoch.elapsed().as_nanos() as u64;
                    stats
                        .load_deliveries
                        .entry(key)
                        .or_default()
                        .push((recv_ns, (frame.payload.len() * 8) as u64));
                }
                FrameKind::ProbeReply => {}
            }
        }
        Ok(stats)
    });
    Ok(ServerHandle { stop, thread, addr })
}
