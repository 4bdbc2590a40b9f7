//! Receiver-side bookkeeping: which link won each frame.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dedup::{DedupDecision, DedupState};

/// Per-link counters of frames whose first-arriving copy came via that link.
///
/// Counters sum to the number of accepted frames, so the fractions say how
/// often each link was the fastest usable path.
#[derive(Debug, Clone)]
pub struct LinkShareAccounting {
    names: Vec<String>,
    counts: Vec<u64>,
}

impl LinkShareAccounting {
    pub fn new(link_names: &[String]) -> Self {
        Self { names: link_names.to_vec(), counts: vec![0; link_names.len()] }
    }

    pub fn credit(&mut self, link: usize) {
        self.counts[link] += 1;
    }

    pub fn count(&self, link: usize) -> u64 {
        self.counts[link]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fraction of accepted frames first seen on each link; zeros when
    /// nothing was accepted.
    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    pub fn to_shares(&self) -> LinkShares {
        let fractions = self.fractions();
        LinkShares {
            total_accepted: self.total(),
            per_link: self
                .names
                .iter()
                .zip(self.counts.iter().zip(fractions))
                .map(|(name, (&count, fraction))| (name.clone(), LinkShare { count, fraction }))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LinkShare {
    pub count: u64,
    pub fraction: f64,
}

/// Report form of the accounting, keyed by link name.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LinkShares {
    pub total_accepted: u64,
    pub per_link: BTreeMap<String, LinkShare>,
}

/// First-arrival handling for one incoming copy: accept it exactly when it is
/// the first sighting of `(flow_id, seq)`, and credit the link that carried it.
pub fn on_copy_arrival(
    dedup: &mut DedupState,
    accounting: &mut LinkShareAccounting,
    link: usize,
    flow_id: u32,
    seq: u64,
) -> DedupDecision {
    let decision = dedup.accept(flow_id, seq);
    if decision.is_accept() {
        accounting.credit(link);
    }
    decision
}

/// Round trip of one probe frame under duplication: the minimum over copies
/// that survived both directions, or an outage when none did within the
/// threshold.
pub fn end_to_end_rtt(per_copy_rtt_ns: &[Option<u64>], outage_threshold_ms: u64) -> Option<f64> {
    let best = per_copy_rtt_ns.iter().flatten().min()?;
    let rtt_ms = *best as f64 / 1e6;
    (rtt_ms <= outage_threshold_ms as f64).then_some(rtt_ms)
}
