//! Scenario files: the JSON schema binding links, policy, and measurement
//! configs into one reproducible experiment.
//!
//! ```json
//! {
//!   "name": "smoke",
//!   "seed": 42,
//!   "duration_s": 60,
//!   "policy": { "type": "full-duplication" },
//!   "links": [
//!     { "name": "a", "latency": { "type": "constant", "ms": 10 }, "capacity_mbps": 100 },
//!     { "name": "b",
//!       "latency": { "type": "quantile-csv", "path": "sat_oneway.csv" },
//!       "capacity_mbps": 100,
//!       "outage": { "type": "scheduled", "windows_s": [[10, 20]] } }
//!   ],
//!   "probe": { "interval_ms": 100, "payload_bytes": 64 },
//!   "loads": [ { "direction": "dl", "target_mbps": 100 } ],
//!   "requirements": "builtin"
//! }
//! ```
//!
//! Relative paths (quantile CSVs, RSRP traces) resolve against the scenario
//! file's directory. File references are loaded up front so a scenario
//! object is self-contained and every configuration problem surfaces before
//! anything runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::campaign::{LoadConfig, ProbeConfig};
use crate::error::{ConfigError, Error, Result};
use crate::link::{LatencyModel, LinkProfile, OutageSpec, QuantileTable, RsrpTrace};
use crate::policy::DuplicationPolicy;

/// Where the requirement set comes from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RequirementsRef {
    /// `"builtin"` for the compiled-in registry.
    Builtin(String),
    File { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub duration_s: f64,
    pub links: Vec<LinkProfile>,
    pub policy: DuplicationPolicy,
    pub probe: Option<ProbeConfig>,
    pub loads: Vec<LoadConfig>,
    pub requirements: Option<RequirementsRef>,
    pub output_dir: Option<PathBuf>,
    pub emit_event_log: bool,
    /// Traces loaded for links with trace-driven outage, keyed by link name.
    pub traces: BTreeMap<String, Arc<RsrpTrace>>,
}

/// On-disk form; latency models may reference CSV files.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioFile {
    name: String,
    seed: u64,
    duration_s: f64,
    links: Vec<LinkSpec>,
    policy: DuplicationPolicy,
    #[serde(default)]
    probe: Option<ProbeConfig>,
    #[serde(default)]
    loads: Vec<LoadConfig>,
    #[serde(default)]
    requirements: Option<RequirementsRef>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    emit_event_log: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LinkSpec {
    name: String,
    latency: LatencySpec,
    #[serde(default)]
    loss_prob: f64,
    capacity_mbps: f64,
    #[serde(default)]
    bucket_depth_bytes: Option<u64>,
    #[serde(default)]
    outage: OutageSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum LatencySpec {
    Constant { ms: f64 },
    Normal { mean_ms: f64, std_ms: f64, floor_ms: f64 },
    LogNormal { mu: f64, sigma: f64, floor_ms: f64 },
    QuantileTable { points: QuantileTable },
    /// Two-column `p,value_ms` CSV. `halve_rtt` when the file holds
    /// round-trip values that must become a one-way model.
    QuantileCsv {
        path: PathBuf,
        #[serde(default)]
        halve_rtt: bool,
    },
}

impl LatencySpec {
    fn resolve(self, base: &Path) -> std::result::Result<LatencyModel, String> {
        Ok(match self {
            LatencySpec::Constant { ms } => LatencyModel::Constant { ms },
            LatencySpec::Normal { mean_ms, std_ms, floor_ms } => {
                LatencyModel::Normal { mean_ms, std_ms, floor_ms }
            }
            LatencySpec::LogNormal { mu, sigma, floor_ms } => {
                LatencyModel::LogNormal { mu, sigma, floor_ms }
            }
            LatencySpec::QuantileTable { points } => LatencyModel::QuantileTable { points },
            LatencySpec::QuantileCsv { path, halve_rtt } => {
                let table = QuantileTable::from_csv_path(&base.join(&path))?;
                let points = if halve_rtt { table.halved() } else { table };
                LatencyModel::QuantileTable { points }
            }
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.to_path_buf(), source: e })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_json_str(&text, &base)
    }

    pub fn from_json_str(text: &str, base: &Path) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let mut problems = Vec::new();
        let mut links = Vec::new();
        let mut traces = BTreeMap::new();
        for spec in file.links {
            let latency = match spec.latency.resolve(base) {
                Ok(model) => model,
                Err(e) => {
                    problems.push(format!("link {:?}: {e}", spec.name));
                    LatencyModel::constant(0.0)
                }
            };
            if let OutageSpec::RsrpTrace { path: Some(trace_path), .. } = &spec.outage {
                match RsrpTrace::from_csv_path(&base.join(trace_path)) {
                    Ok(trace) => {
                        traces.insert(spec.name.clone(), Arc::new(trace));
                    }
                    Err(e) => problems.push(format!("link {:?}: trace: {e}", spec.name)),
                }
            }
            links.push(LinkProfile {
                name: spec.name,
                latency,
                loss_prob: spec.loss_prob,
                capacity_mbps: spec.capacity_mbps,
                bucket_depth_bytes: spec.bucket_depth_bytes.unwrap_or(crate::link::DEFAULT_BUCKET_DEPTH_BYTES),
                outage: spec.outage,
            });
        }
        let scenario = Self {
            name: file.name,
            seed: file.seed,
            duration_s: file.duration_s,
            links,
            policy: file.policy,
            probe: file.probe,
            loads: file.loads,
            requirements: file.requirements,
            output_dir: file.output_dir,
            emit_event_log: file.emit_event_log,
            traces,
        };
        problems.extend(scenario.problems());
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems).into());
        }
        Ok(scenario)
    }

    /// Every configuration problem, collected rather than first-error-wins.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.is_empty() {
            out.push("scenario name must not be empty".into());
        }
        if !(self.duration_s > 0.0) {
            out.push(format!("duration {} must be > 0", self.duration_s));
        }
        if self.links.is_empty() {
            out.push("at least one link is required".into());
        }
        for link in &self.links {
            out.extend(link.problems());
            if matches!(link.outage, OutageSpec::RsrpTrace { .. }) {
                match self.traces.get(&link.name) {
                    None => out.push(format!("link {:?}: rsrp-trace outage has no trace", link.name)),
                    Some(trace) => {
                        if trace.start_s() > 0.0 {
                            out.push(format!(
                                "link {:?}: trace starts at {} s, after the run origin",
                                link.name,
                                trace.start_s()
                            ));
                        }
                        if trace.end_s() < self.duration_s {
                            out.push(format!(
                                "link {:?}: trace ends at {} s, before the run end {}",
                                link.name,
                             trace.end_s(),
                                self.duration_s
                            ));
                        }
                    }
                }
            }
        }
        if let Err(e) = crate::policy::PolicyEngine::new(
            self.policy.clone(),
            &self.links.iter().map(|l| l.name.clone()).collect::<Vec<_>>(),
        ) {
            out.push(e.to_string());
        }
        if let Some(probe) = &self.probe {
            out.extend(probe.problems());
        }
        for load in &self.loads {
            out.extend(load.problems());
        }
        if self.probe.is_none() && self.loads.is_empty() {
            out.push("scenario runs nothing: no probe and no loads".into());
        }
        out
    }

    /// Canonical JSON of the resolved configuration; the basis for the
    /// report's config hash.
    pub fn canonical_json(&self) -> Result<String> {
        let value = serde_json::json!({
            "name": self.name,
            "seed": self.seed,
            "duration_s": self.duration_s,
            "links": self.links,
            "policy": self.policy,
            "probe": self.probe,
            "loads": self.loads,
            "emit_event_log": self.emit_event_log,
        });
        Ok(serde_json::to_string(&value)?)
    }

    /// FNV-1a over the canonical configuration, as provenance identity.
    pub fn config_hash(&self) -> Result<String> {
        let json = self.canonical_json()?;
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in json.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        Ok(format!("{hash:016x}"))
    }

    pub fn requirement_set(&self) -> Result<Option<Vec<crate::requirements::UseCaseRequirement>>> {
        match &self.requirements {
            None => Ok(None),
            Some(RequirementsRef::Builtin(tag)) if tag == "builtin" => {
                Ok(Some(crate::fixtures::requirement_registry()))
            }
            Some(RequirementsRef::Builtin(other)) => Err(Error::Config(ConfigError::Unresolved(
                format!("unknown requirements tag {other:?}; use \"builtin\" or a path object"),
            ))),
            Some(RequirementsRef::File { path }) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::Read { path: path.clone(), source: e })?;
                Ok(Some(serde_json::from_str(&text)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "smoke",
        "seed": 42,
        "duration_s": 10,
        "policy": { "type": "full-duplication" },
        "links": [
            { "name": "a", "latency": { "type": "constant", "ms": 10 }, "capacity_mbps": 100 },
            { "name": "b", "latency": { "type": "constant", "ms": 25 }, "capacity_mbps": 100 }
        ],
        "probe": {}
    }"#;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let s = Scenario::from_json_str(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(s.links.len(), 2);
        assert_eq!(s.probe.as_ref().unwrap().interval_ms, 100);
        assert_eq!(s.probe.as_ref().unwrap().payload_bytes, 64);
        assert_eq!(s.links[0].bucket_depth_bytes, crate::link::DEFAULT_BUCKET_DEPTH_BYTES);
        assert!(!s.emit_event_log);
    }

    #[test]
    fn all_problems_reported_at_once() {
        let bad = r#"{
            "name": "",
            "seed": 1,
            "duration_s": -1,
            "policy": { "type": "primary-with-backup", "primary": "zzz", "rtt_threshold_ms": 100 },
            "links": [
                { "name": "a", "latency": { "type": "constant", "ms": -5 }, "capacity_mbps": 0 }
            ]
        }"#;
        let err = Scenario::from_json_str(bad, Path::new(".")).unwrap_err();
        let text = err.to_string();
        for needle in ["name must not", "duration", "capacity", "zzz", "runs nothing"] {
            assert!(text.contains(needle), "missing {needle:?} in: {text}");
        }
    }

    #[test]
    fn quantile_csv_resolves_against_base_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("rtt.csv"), "p,value_ms\n0.0,20\n0.5,30\n1.0,100\n").unwrap();
        let json = r#"{
            "name": "csv",
            "seed": 1,
            "duration_s": 5,
            "policy": { "type": "full-duplication" },
            "links": [
                { "name": "a",
                  "latency": { "type": "quantile-csv", "path": "rtt.csv", "halve_rtt": true },
                  "capacity_mbps": 100 }
            ],
            "probe": {}
        }"#;
        let s = Scenario::from_json_str(json, dir.path()).unwrap();
        match &s.links[0].latency {
            LatencyModel::QuantileTable { points } => assert_eq!(points.value_at(0.5), 15.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_csv_is_an_enumerated_problem() {
        let json = r#"{
            "name": "csv",
            "seed": 1,
            "duration_s": 5,
            "policy": { "type": "full-duplication" },
            "links": [
                { "name": "a", "latency": { "type": "quantile-csv", "path": "nope.csv" }, "capacity_mbps": 100 }
            ],
            "probe": {}
        }"#;
        let err = Scenario::from_json_str(json, Path::new("/definitely/missing")).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = Scenario::from_json_str(MINIMAL, Path::new(".")).unwrap();
        let b = Scenario::from_json_str(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(a.config_hash().unwrap(), b.config_hash().unwrap());
        let altered = MINIMAL.replace("\"seed\": 42", "\"seed\": 43");
        let c = Scenario::from_json_str(&altered, Path::new(".")).unwrap();
        assert_ne!(a.config_hash().unwrap(), c.config_hash().unwrap());
    }

    #[test]
    fn builtin_requirements_resolve() {
        let json = MINIMAL.replace("\"probe\": {}", "\"probe\": {}, \"requirements\": \"builtin\"");
        let s = Scenario::from_json_str(&json, Path::new(".")).unwrap();
        assert_eq!(s.requirement_set().unwrap().unwrap().len(), 12);
    }
}
