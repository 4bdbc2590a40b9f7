//! Stochastic single-interface emulation.
//!
//! A [`LinkProfile`] describes one interface as a delay distribution, a frame
//! loss probability, a token-bucket capacity, and an outage process. An
//! instantiated [`Link`] has independent up and down channels, each with its
//! own seeded random stream, so runs replay bit-exactly and a link's draws do
//! not depend on which other links share the scenario.

mod bucket;
mod latency;
mod outage;
mod rsrp;

pub use bucket::TokenBucket;
pub use latency::{LatencyModel, QuantileTable};
pub use outage::{OutageProcess, OutageSpec};
pub use rsrp::{RsrpRecord, RsrpTrace, DEFAULT_CRITICAL_RSRP_DBM};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frame::HEADER_LEN;

/// Default token-bucket depth: one shallow queue's worth of burst.
pub const DEFAULT_BUCKET_DEPTH_BYTES: u64 = 65_536;

fn default_bucket_depth() -> u64 {
    DEFAULT_BUCKET_DEPTH_BYTES
}

/// Configuration of one emulated interface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LinkProfile {
    pub name: String,
    /// One-way delay model, milliseconds.
    pub latency: LatencyModel,
    /// Independent per-frame loss probability.
    #[serde(default)]
    pub loss_prob: f64,
    /// Token-bucket rate in payload megabits per second.
    pub capacity_mbps: f64,
    #[serde(default = "default_bucket_depth")]
    pub bucket_depth_bytes: u64,
    #[serde(default)]
    pub outage: OutageSpec,
}

impl LinkProfile {
    pub fn new(name: &str, latency: LatencyModel, capacity_mbps: f64) -> Self {
        Self {
            name: name.to_string(),
            latency,
            loss_prob: 0.0,
            capacity_mbps,
            bucket_depth_bytes: DEFAULT_BUCKET_DEPTH_BYTES,
            outage: OutageSpec::None,
        }
    }

    /// All problems with this profile, empty when valid.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.is_empty() {
            out.push("link name must not be empty".into());
        }
        if let Err(e) = self.latency.validate() {
            out.push(format!("link {:?}: latency: {e}", self.name));
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            out.push(format!("link {:?}: loss_prob {} outside [0, 1]", self.name, self.loss_prob));
        }
        if !self.capacity_mbps.is_finite() || self.capacity_mbps <= 0.0 {
            out.push(format!("link {:?}: capacity {} must be > 0", self.name, self.capacity_mbps));
        }
        if let Err(e) = self.outage.validate() {
            out.push(format!("link {:?}: outage: {e}", self.name));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Outage,
    Loss,
}

/// Outcome of handing one frame to a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmit {
    Deliver { at_ns: u64 },
    Dropped { reason: DropReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelDir {
    Up,
    Down,
}

/// One direction of a link.
#[derive(Debug)]
pub struct Channel {
    sampler: latency::Sampler,
    loss_prob: f64,
    bucket: TokenBucket,
    outage: OutageProcess,
    rng: ChaCha8Rng,
}

impl Channel {
    /// Routes one frame: outage drop, then random loss, then (for shaped
    /// traffic) the token bucket, then the sampled one-way delay. The
    /// delivery timestamp never precedes `now_ns`.
    ///
    /// `payload_bits` is what the bucket charges for; probe traffic is tiny
    /// and skips shaping entirely (`shaped = false`).
    pub fn transmit(&mut self, now_ns: u64, payload_bits: u64, shaped: bool) -> Result<Transmit> {
        let now_s = now_ns as f64 / 1e9;
        if self.outage.active(now_s)? {
            return Ok(Transmit::Dropped { reason: DropReason::Outage });
        }
        if self.loss_prob > 0.0 && self.rng.gen::<f64>() < self.loss_prob {
            return Ok(Transmit::Dropped { reason: DropReason::Loss });
        }
        let depart_s = if shaped { self.bucket.serve(now_s, payload_bits as f64) } else { now_s };
        let delay_ms = self.sampler.sample(&mut self.rng);
        let at_ns = ((depart_s + delay_ms / 1e3) * 1e9).round() as u64;
        Ok(Transmit::Deliver { at_ns: at_ns.max(now_ns) })
    }
}

/// Instantiated interface: an up channel and a down channel sharing one
/// profile but drawing from independent random streams.
#[derive(Debug)]
pub struct Link {
    pub name: String,
    pub up: Channel,
    pub down: Channel,
}

impl Link {
    /// `campaign` namespaces the random streams so separate campaigns on the
    /// same scenario seed stay independent.
    pub fn from_profile(
        profile: &LinkProfile,
        root_seed: u64,
        campaign: &str,
        trace: Option<Arc<RsrpTrace>>,
    ) -> Result<Self> {
        let problems = profile.problems();
        if !problems.is_empty() {
            return Err(crate::error::ConfigError::Invalid(problems).into());
        }
        let channel = |dir: &str, trace: Option<Arc<RsrpTrace>>| -> Result<Channel> {
            let rng = ChaCha8Rng::seed_from_u64(derive_seed(root_seed, &[campaign, &profile.name, dir]));
            let outage_rng =
                ChaCha8Rng::seed_from_u64(derive_seed(root_seed, &[campaign, &profile.name, dir, "outage"]));
            Ok(Channel {
                sampler: profile.latency.sampler(),
                loss_prob: profile.loss_prob,
                bucket: TokenBucket::new(profile.capacity_mbps * 1e6, profile.bucket_depth_bytes as f64 * 8.0),
                outage: OutageProcess::from_spec(&profile.outage, trace, outage_rng)?,
                rng,
            })
        };
        Ok(Self {
            name: profile.name.clone(),
            up: channel("up", trace.clone())?,
            down: channel("down", trace)?,
        })
    }
}

/// Stable seed derivation: FNV-1a over the tags, mixed with the root seed
/// through splitmix64. Keeps per-link, per-direction streams independent and
/// identical across platforms.
pub fn derive_seed(root: u64, tags: &[&str]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for tag in tags {
        for &byte in tag.as_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash ^= 0xff;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    splitmix64(root ^ hash)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Wire size of a frame with the given payload, in bits.
pub fn frame_bits(payload_len: usize) -> u64 {
    ((HEADER_LEN + payload_len) * 8) as u64
}
