//! Multi-connectivity packet duplication over emulated or real datagram
//! links, plus the measurement and analysis pipeline around it.
//!
//! The crate splits into three layers:
//!
//! * transport: the tunnel wire format ([`frame`]), first-arrival
//!   deduplication ([`dedup`]), and sender-side link selection ([`policy`]);
//! * emulation and measurement: seeded stochastic links ([`link`]), the
//!   deterministic event-driven campaigns over them ([`sim`]), live UDP
//!   endpoints ([`tunnel`]), and the probe/load procedures ([`campaign`]);
//! * analytics: distribution statistics and confidence bounds ([`stats`]),
//!   coverage traces ([`coverage`]), and the requirement/feasibility layer
//!   ([`requirements`], [`feasibility`]).
//!
//! Emulated runs are pure functions of `(scenario, seed)`: the same inputs
//! produce byte-identical series files and reports.

pub mod accounting;
pub mod campaign;
pub mod coverage;
pub mod dedup;
pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod frame;
pub mod link;
pub mod policy;
pub mod report;
pub mod requirements;
pub mod scenario;
pub mod series;
pub mod sim;
pub mod stats;
pub mod tunnel;

pub use accounting::LinkShareAccounting;
pub use dedup::{DedupDecision, DedupState};
pub use error::{ConfigError, Error, Result};
pub use feasibility::{FeasibilityClass, FeasibilityMatrix};
pub use frame::{FrameKind, TunnelFrame};
pub use link::{LatencyModel, LinkProfile, OutageSpec, RsrpTrace};
pub use policy::DuplicationPolicy;
pub use report::RunReport;
pub use requirements::{KpiAvailability, RequirementKind, UseCaseRequirement};
pub use scenario::Scenario;
pub use series::{MetricKind, SamplePoint, SampleSeries};
pub use stats::{DistributionSummary, EmpiricalDistribution};
