//! Receiver-side first-arrival deduplication.
//!
//! When the same frame travels over several links, the receiver accepts the
//! first copy of each `(flow_id, seq)` and rejects the rest. State per flow is
//! a sliding bitmap over the last `window` sequence numbers, so memory stays
//! bounded no matter how long the stream runs. Sequence numbers that have
//! fallen below the window are rejected as duplicates: a stale first arrival
//! is indistinguishable from a duplicate, and dropping it is the safe call.

use std::collections::HashMap;

/// Default per-flow window, in frames.
pub const DEFAULT_WINDOW: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupDecision {
    /// First sighting of this `(flow_id, seq)` within window history.
    Accept,
    /// Already seen, or below the window's lower edge.
    Duplicate,
}

impl DedupDecision {
    pub fn is_accept(self) -> bool {
        matches!(self, DedupDecision::Accept)
    }
}

#[derive(Debug)]
struct FlowWindow {
    /// Highest seq observed; the window covers `[max_seq - window + 1, max_seq]`.
    max_seq: u64,
    /// One bit per window slot, indexed by `seq % window`.
    bits: Vec<u64>,
    evictions: u64,
}

impl FlowWindow {
    fn new(window: u64, first_seq: u64) -> Self {
        let mut fw = Self { max_seq: first_seq, bits: vec![0; window.div_ceil(64) as usize], evictions: 0 };
        fw.set(first_seq % window);
        fw
    }

    fn set(&mut self, slot: u64) {
        self.bits[(slot / 64) as usize] |= 1 << (slot % 64);
    }

    fn test(&self, slot: u64) -> bool {
        self.bits[(slot / 64) as usize] & (1 << (slot % 64)) != 0
    }

    fn clear(&mut self, slot: u64) {
        self.bits[(slot / 64) as usize] &= !(1 << (slot % 64));
    }
}

/// Per-flow first-arrival filter with O(window) memory per flow.
#[derive(Debug)]
pub struct DedupState {
    window: u64,
    flows: HashMap<u32, FlowWindow>,
}

impl Default for DedupState {
    fn default() -> Self {
        Self::new()
    }
}

impl DedupState {
    pub fn new() -> Self {
        Self::with_window(DEFAULT_WINDOW)
    }

    /// `window` is the number of recent seqs tracked per flow; must be >= 1.
    pub fn with_window(window: u64) -> Self {
        assert!(window >= 1, "dedup window must be at least 1");
        Self { window, flows: HashMap::new() }
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    /// Accepted entries that slid out of a window without being duplicated.
    pub fn evictions(&self) -> u64 {
        self.flows.values().map(|f| f.evictions).sum()
    }

    pub fn tracked_flows(&self) -> usize {
        self.flows.len()
    }

    /// Decide whether this copy is the first arrival of `(flow_id, seq)`.
    pub fn accept(&mut self, flow_id: u32, seq: u64) -> DedupDecision {
        let w = self.window;
        let Some(fw) = self.flows.get_mut(&flow_id) else {
            self.flows.insert(flow_id, FlowWindow::new(w, seq));
            return DedupDecision::Accept;
        };
        if seq > fw.max_seq {
            let delta = seq - fw.max_seq;
            if delta >= w {
                fw.evictions += fw.bits.iter().map(|b| b.count_ones() as u64).sum::<u64>();
                fw.bits.fill(0);
            } else {
                for s in fw.max_seq + 1..=seq {
                    let slot = s % w;
                    if fw.test(slot) {
                        fw.evictions += 1;
                        fw.clear(slot);
                    }
                }
            }
            fw.max_seq = seq;
            fw.set(seq % w);
            return DedupDecision::Accept;
        }
        let floor = fw.max_seq.saturating_sub(w - 1);
        if seq < floor {
            return DedupDecision::Duplicate;
        }
        let slot = seq % w;
        if fw.test(slot) {
            DedupDecision::Duplicate
        } else {
            fw.set(slot);
            DedupDecision::Accept
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use std::collections::HashSet;

    #[test]
    fn first_arrival_accepted_second_rejected() {
        let mut d = DedupState::new();
        assert_eq!(d.accept(0, 5), DedupDecision::Accept);
        assert_eq!(d.accept(0, 5), DedupDecision::Duplicate);
    }

    #[test]
    fn flows_are_independent() {
        let mut d = DedupState::new();
        assert!(d.accept(0, 5).is_accept());
        assert!(d.accept(1, 5).is_accept());
        assert_eq!(d.tracked_flows(), 2);
    }

    #[test]
    fn interleaved_double_delivery_accepts_each_seq_once() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut stream: Vec<u64> = (0..1000).chain(0..1000).collect();
        stream.shuffle(&mut rng);

        // Set-membership oracle: 4096-frame window never evicts within 0..999.
        let mut seen = HashSet::new();
        let mut d = DedupState::new();
        let mut accepts = 0;
        for seq in stream {
            let expect = seen.insert(seq);
            let got = d.accept(9, seq).is_accept();
            assert_eq!(got, expect, "seq {seq}");
            accepts += got as u32;
        }
        assert_eq!(accepts, 1000);
    }

    #[test]
    fn seq_below_window_after_eviction_is_duplicate() {
        let mut d = DedupState::with_window(16);
        assert!(d.accept(0, 0).is_accept());
        assert!(d.accept(0, 100).is_accept());
        // Window now covers [85, 100]; 3 was never seen but is stale.
        assert_eq!(d.accept(0, 3), DedupDecision::Duplicate);
    }

    #[test]
    fn eviction_counter_counts_displaced_accepts() {
        let mut d = DedupState::with_window(8);
        for seq in 0..8 {
            assert!(d.accept(0, seq).is_accept());
        }
        assert_eq!(d.evictions(), 0);
        assert!(d.accept(0, 8).is_accept()); // displaces seq 0
        assert_eq!(d.evictions(), 1);
        assert!(d.accept(0, 100).is_accept()); // displaces everything else
        assert_eq!(d.evictions(), 8);
    }

    #[test]
    fn memory_stays_bounded_by_window() {
        let mut d = DedupState::with_window(64);
        for seq in 0..100_000u64 {
            d.accept(0, seq);
        }
        assert_eq!(d.flows[&0].bits.len(), 1);
    }

    /// Replay oracle: accept iff seq advances the window, or is inside the
    /// window and was never accepted before.
    fn oracle_replay(window: u64, stream: &[u64]) -> Vec<bool> {
        let mut max: Option<u64> = None;
        let mut accepted = HashSet::new();
        stream
            .iter()
            .map(|&seq| {
                let ok = match max {
                    None => true,
                    Some(m) if seq > m => true,
                    Some(m) => seq >= m.saturating_sub(window - 1) && !accepted.contains(&seq),
                };
                if ok {
                    accepted.insert(seq);
                    max = Some(max.map_or(seq, |m| m.max(seq)));
                }
                ok
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matches_replay_oracle(
            window in 1u64..64,
            stream in proptest::collection::vec(0u64..200, 0..400),
        ) {
            let mut d = DedupState::with_window(window);
            let got: Vec<bool> = stream.iter().map(|&s| d.accept(0, s).is_accept()).collect();
            prop_assert_eq!(got, oracle_replay(window, &stream));
        }
    }
}
