//! Sender-side link selection.
//!
//! Full duplication sends every frame over every link and lets the receiver
//! keep the first copy; it is the upper bound on what multi-connectivity can
//! deliver. The other policies trade redundancy for resource use: keep a
//! primary link and duplicate only when its probe RTTs degrade, or follow
//! whichever link currently estimates best.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};

fn default_probe_window() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DuplicationPolicy {
    FullDuplication,
    PrimaryWithBackup {
        primary: String,
        rtt_threshold_ms: f64,
        /// Smoothing window for the RTT estimate, in probes.
        #[serde(default = "default_probe_window")]
        probe_window: usize,
    },
    QualitySwitch {
        hysteresis_ms: f64,
        #[serde(default = "default_probe_window")]
        probe_window: usize,
    },
}

impl DuplicationPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            DuplicationPolicy::FullDuplication => "full-duplication",
            DuplicationPolicy::PrimaryWithBackup { .. } => "primary-with-backup",
            DuplicationPolicy::QualitySwitch { .. } => "quality-switch",
        }
    }
}

/// Exponentially weighted RTT average over an effective probe window.
#[derive(Debug, Clone)]
pub struct EwmaRtt {
    alpha: f64,
    value: Option<f64>,
}

impl EwmaRtt {
    pub fn new(window: usize) -> Self {
        Self { alpha: 2.0 / (window.max(1) as f64 + 1.0), value: None }
    }

    pub fn observe(&mut self, rtt_ms: f64) {
        self.value = Some(match self.value {
            None => rtt_ms,
            Some(v) => v + self.alpha * (rtt_ms - v),
        });
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }
}

/// Resolved policy bound to a fixed link list.
#[derive(Debug)]
pub struct PolicyEngine {
    policy: DuplicationPolicy,
    names: Vec<String>,
    estimators: Vec<EwmaRtt>,
    /// Whether the most recent probe on each link went unanswered.
    last_probe_lost: Vec<bool>,
    primary: usize,
    current: usize,
}

impl PolicyEngine {
    pub fn new(policy: DuplicationPolicy, link_names: &[String]) -> Result<Self> {
        let mut problems = Vec::new();
        if link_names.is_empty() {
            problems.push("policy needs at least one configured link".to_string());
        }
        let mut primary = 0;
        let window = match &policy {
            DuplicationPolicy::FullDuplication => default_probe_window(),
            DuplicationPolicy::PrimaryWithBackup { primary: name, rtt_threshold_ms, probe_window } => {
                match link_names.iter().position(|n| n == name) {
                    Some(idx) => primary = idx,
                    None => problems.push(format!("primary link {name:?} is not configured")),
                }
                if !(*rtt_threshold_ms > 0.0) {
                    problems.push(format!("rtt threshold {rtt_threshold_ms} must be > 0"));
                }
                *probe_window
            }
            DuplicationPolicy::QualitySwitch { hysteresis_ms, probe_window } => {
                if !(*hysteresis_ms >= 0.0) {
                    problems.push(format!("hysteresis {hysteresis_ms} must be >= 0"));
                }
                *probe_window
            }
        };
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems).into());
        }
        Ok(Self {
            policy,
            estimators: link_names.iter().map(|_| EwmaRtt::new(window)).collect(),
            last_probe_lost: vec![false; link_names.len()],
            names: link_names.to_vec(),
            primary,
            current: primary,
        })
    }

    pub fn policy(&self) -> &DuplicationPolicy {
        &self.policy
    }

    pub fn link_names(&self) -> &[String] {
        &self.names
    }

    /// Links the next frame should be copied onto.
    pub fn select(&self) -> Vec<usize> {
        match &self.policy {
            DuplicationPolicy::FullDuplication => (0..self.names.len()).collect(),
            DuplicationPolicy::PrimaryWithBackup { rtt_threshold_ms, .. } => {
                let healthy = !self.last_probe_lost[self.primary]
                    && self.estimators[self.primary].value().map_or(true, |v| v <= *rtt_threshold_ms);
                if healthy {
                    vec![self.primary]
                } else {
                    (0..self.names.len()).collect()
                }
            }
            DuplicationPolicy::QualitySwitch { .. } => vec![self.current],
        }
    }

    /// Feed a completed per-link round trip into the estimators.
    pub fn observe_rtt(&mut self, link: usize, rtt_ms: f64) {
        self.estimators[link].observe(rtt_ms);
        self.last_probe_lost[link] = false;
        self.update_current();
    }

    /// A probe copy on `link` went unanswered; `penalty_ms` (the outage
    /// threshold) stands in for the missing sample.
    pub fn observe_timeout(&mut self, link: usize, penalty_ms: f64) {
        self.estimators[link].observe(penalty_ms);
        self.last_probe_lost[link] = true;
        self.update_current();
    }

    pub fn estimate(&self, link: usize) -> Option<f64> {
        self.estimators[link].value()
    }

    fn update_current(&mut self) {
        if let DuplicationPolicy::QualitySwitch { hysteresis_ms, .. } = &self.policy {
            let best = (0..self.names.len())
                .min_by(|&a, &b| {
                    let ea = self.estimators[a].value().unwrap_or(f64::INFINITY);
                    let eb = self.estimators[b].value().unwrap_or(f64::INFINITY);
                    ea.total_cmp(&eb)
                })
                .unwrap_or(self.current);
            let best_est = self.estimators[best].value().unwrap_or(f64::INFINITY);
            let cur_est = self.estimators[self.current].value().unwrap_or(f64::INFINITY);
            if best != self.current && best_est + hysteresis_ms < cur_est {
                self.current = best;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn full_duplication_selects_every_link_always() {
        let engine = PolicyEngine::new(DuplicationPolicy::FullDuplication, &names(&["a", "b"])).unwrap();
        for _ in 0..5 {
            assert_eq!(engine.select(), vec![0, 1]);
        }
    }

    #[test]
    fn empty_link_set_is_a_config_error() {
        assert!(PolicyEngine::new(DuplicationPolicy::FullDuplication, &[]).is_err());
    }

    #[test]
    fn unknown_primary_is_a_config_error() {
        let policy = DuplicationPolicy::PrimaryWithBackup {
            primary: "c".into(),
            rtt_threshold_ms: 100.0,
            probe_window: 10,
        };
        assert!(PolicyEngine::new(policy, &names(&["a", "b"])).is_err());
    }

    #[test]
    fn healthy_primary_stays_solo() {
        let policy = DuplicationPolicy::PrimaryWithBackup {
            primary: "a".into(),
            rtt_threshold_ms: 100.0,
            probe_window: 10,
        };
        let mut engine = PolicyEngine::new(policy, &names(&["a", "b"])).unwrap();
        assert_eq!(engine.select(), vec![0], "no data yet counts as healthy");
        for _ in 0..20 {
            engine.observe_rtt(0, 40.0);
        }
        assert_eq!(engine.select(), vec![0]);
    }

    #[test]
    fn degraded_primary_switches_at_the_oracle_point() {
        // Scripted RTTs: healthy, then a step to 400 ms. Replay the same
        // sequence through an independent EWMA to find the crossing.
        let window = 10;
        let threshold = 100.0;
        let script: Vec<f64> = std::iter::repeat(40.0).take(10).chain(std::iter::repeat(400.0).take(10)).collect();

        let alpha = 2.0 / (window as f64 + 1.0);
        let mut est = f64::NAN;
        let mut oracle_switch = None;
        for (i, &rtt) in script.iter().enumerate() {
            est = if est.is_nan() { rtt } else { est + alpha * (rtt - est) };
            if est > threshold && oracle_switch.is_none() {
                oracle_switch = Some(i);
            }
        }
        let oracle_switch = oracle_switch.expect("script must cross the threshold");

        let policy = DuplicationPolicy::PrimaryWithBackup {
            primary: "a".into(),
            rtt_threshold_ms: threshold,
            probe_window: window,
        };
        let mut engine = PolicyEngine::new(policy, &names(&["a", "b"])).unwrap();
        for (i, &rtt) in script.iter().enumerate() {
            engine.observe_rtt(0, rtt);
            let expect_both = i >= oracle_switch;
            assert_eq!(engine.select().len() == 2, expect_both, "probe {i}");
        }
    }

    #[test]
    fn lost_probe_on_primary_forces_duplication() {
        let policy = DuplicationPolicy::PrimaryWithBackup {
            primary: "a".into(),
            rtt_threshold_ms: 5000.0,
            probe_window: 10,
        };
        let mut engine = PolicyEngine::new(policy, &names(&["a", "b"])).unwrap();
        engine.observe_timeout(0, 2000.0);
        assert_eq!(engine.select(), vec![0, 1]);
        // Estimate stays poisoned above threshold-free check until it decays,
        // but a fresh reply clears the loss flag.
        for _ in 0..100 {
            engine.observe_rtt(0, 30.0);
        }
        assert_eq!(engine.select(), vec![0]);
    }

    #[test]
    fn quality_switch_needs_margin_beyond_hysteresis() {
        let policy = DuplicationPolicy::QualitySwitch { hysteresis_ms: 10.0, probe_window: 1 };
        let mut engine = PolicyEngine::new(policy, &names(&["a", "b"])).unwrap();
        assert_eq!(engine.select(), vec![0]);
        engine.observe_rtt(0, 50.0);
        engine.observe_rtt(1, 45.0);
        assert_eq!(engine.select(), vec![0], "5 ms better is inside hysteresis");
        engine.observe_rtt(1, 20.0);
        assert_eq!(engine.select(), vec![1], "30 ms better clears it");
    }

    #[test]
    fn ewma_window_controls_smoothing() {
        let mut fast = EwmaRtt::new(1);
        let mut slow = EwmaRtt::new(100);
        for _ in 0..3 {
            fast.observe(10.0);
            slow.observe(10.0);
        }
        fast.observe(100.0);
        slow.observe(100.0);
        assert!(fast.value().unwrap() > slow.value().unwrap());
    }
}
