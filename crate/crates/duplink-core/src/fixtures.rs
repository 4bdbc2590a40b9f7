//! Built-in reference data: the rural-IoT requirement registry, the
//! published availability grid for the five connectivity options, and link
//! profiles fitted to the published latency/throughput statistics.
//!
//! The profiles are fitted approximations, not replays: quantile tables pin
//! the published round-trip medians and tail percentiles (halved into
//! one-way models), outage mass is encoded as the table's beyond-threshold
//! tail, and capacities approximate the published delivered medians per
//! direction.

use crate::campaign::LoadDirection;
use crate::feasibility::AvailabilityGrid;
use crate::link::{LatencyModel, LinkProfile, QuantileTable};
use crate::requirements::{KpiAvailability, RequirementKind, UseCaseRequirement};

pub const TECH_SC_OPERATOR_A: &str = "sc-operator-a";
pub const TECH_SC_OPERATOR_B: &str = "sc-operator-b";
pub const TECH_SC_SATELLITE: &str = "sc-satellite";
pub const TECH_MC_CELLULAR: &str = "mc-cellular";
pub const TECH_MC_CELLULAR_SATELLITE: &str = "mc-cellular-satellite";

/// Technology columns in display order.
pub const TECHNOLOGIES: [&str; 5] = [
    TECH_SC_OPERATOR_A,
    TECH_SC_OPERATOR_B,
    TECH_SC_SATELLITE,
    TECH_MC_CELLULAR,
    TECH_MC_CELLULAR_SATELLITE,
];

/// (name, kind, availability fraction, max latency ms, min DL Mbps, min UL Mbps)
const REQUIREMENT_ROWS: [(&str, RequirementKind, f64, f64, f64, f64); 12] = [
    ("m2dc", RequirementKind::CommunicationType, 0.99, 100.0, 50.0, 50.0),
    ("m2sd", RequirementKind::CommunicationType, 0.99, 100.0, 10.0, 10.0),
    ("m2m", RequirementKind::CommunicationType, 0.99, 100.0, 5.0, 5.0),
    ("uc1-precision-agriculture", RequirementKind::UseCase, 0.99, 400.0, 5.0, 5.0),
    ("uc2-digital-twin", RequirementKind::UseCase, 0.99, 400.0, 1.0, 5.0),
    ("uc3-remote-assistance", RequirementKind::UseCase, 0.999, 100.0, 1.0, 20.0),
    ("uc4-emergency-response", RequirementKind::UseCase, 0.999, 100.0, 1.0, 20.0),
    ("uc5-transport-logistics", RequirementKind::UseCase, 0.999, 400.0, 14.0, 1.0),
    ("uc6-automated-access", RequirementKind::UseCase, 0.99, 1000.0, 1.0, 5.0),
    ("uc7-computer-vision", RequirementKind::UseCase, 0.99, 1000.0, 5.0, 10.0),
    ("uc8-predictive-analysis", RequirementKind::UseCase, 0.90, 400.0, 5.0, 5.0),
    ("uc9-remote-sensing", RequirementKind::UseCase, 0.90, 400.0, 1.0, 5.0),
];

/// Published availability percentages per requirement row. Technology order
/// follows [`TECHNOLOGIES`]; each triple is (latency, DL, UL).
const AVAILABILITY_ROWS: [(&str, [[f64; 3]; 5]); 12] = [
    ("m2dc", [
        [88.1, 80.5, 50.4],
        [84.4, 67.3, 46.8],
        [77.3, 92.4, 5.1],
        [97.6, 93.9, 67.8],
        [98.2, 98.5, 58.3],
    ]),
    ("m2sd", [
        [88.1, 87.3, 90.0],
        [84.4, 92.4, 79.3],
        [77.3, 94.6, 86.4],
        [97.6, 98.9, 96.3],
        [98.2, 99.3, 98.7],
    ]),
    ("m2m", [
        [88.1, 88.4, 92.4],
        [84.4, 96.1, 86.1],
        [77.3, 95.1, 88.4],
        [97.6, 99.2, 97.9],
        [98.2, 99.4, 98.9],
    ]),
    ("uc1-precision-agriculture", [
        [90.6, 88.4, 92.4],
        [91.5, 96.1, 86.1],
        [99.8, 95.1, 88.4],
        [98.6, 99.2, 97.9],
        [99.9, 99.4, 98.9],
    ]),
    ("uc2-digital-twin", [
        [90.6, 90.8, 92.4],
        [91.5, 98.0, 86.1],
        [99.8, 95.5, 88.4],
        [98.6, 99.2, 97.9],
        [99.9, 99.5, 98.9],
    ]),
    ("uc3-remote-assistance", [
        [88.1, 90.8, 82.6],
        [84.4, 98.0, 69.2],
        [77.3, 95.5, 60.7],
        [97.6, 99.2, 91.6],
        [98.2, 99.5, 95.6],
    ]),
    ("uc4-emergency-response", [
        [88.1, 90.8, 82.6],
        [84.4, 98.0, 69.2],
        [77.3, 95.5, 60.7],
        [97.6, 99.2, 91.6],
        [98.2, 99.5, 95.6],
    ]),
    ("uc5-transport-logistics", [
        [90.6, 86.4, 93.1],
        [91.5, 89.3, 95.4],
        [99.8, 94.5, 90.2],
        [98.6, 98.5, 99.1],
        [99.9, 99.3, 98.9],
    ]),
    ("uc6-automated-access", [
        [94.6, 90.8, 92.4],
        [98.5, 98.0, 86.1],
        [99.9, 95.5, 88.4],
        [99.6, 99.2, 97.9],
        [99.9, 99.5, 98.9],
    ]),
    ("uc7-computer-vision", [
        [94.6, 88.4, 90.0],
        [98.5, 96.1, 79.3],
        [99.9, 95.1, 86.4],
        [99.6, 99.2, 96.3],
        [99.9, 99.4, 98.7],
    ]),
    ("uc8-predictive-analysis", [
        [90.6, 88.4, 92.4],
        [91.5, 96.1, 86.1],
        [99.8, 95.1, 88.4],
        [98.6, 99.2, 97.9],
        [99.9, 99.4, 98.9],
    ]),
    ("uc9-remote-sensing", [
        [90.6, 90.8, 92.4],
        [91.5, 98.0, 86.1],
        [99.8, 95.5, 88.4],
        [98.6, 99.2, 97.9],
        [99.9, 99.5, 98.9],
    ]),
];

/// The twelve connectivity requirements: three general communication types
/// and nine rural use cases.
pub fn requirement_registry() -> Vec<UseCaseRequirement> {
    REQUIREMENT_ROWS
        .iter()
        .map(|&(name, kind, avail, lat, dl, ul)| UseCaseRequirement {
            name: name.to_string(),
            kind,
            min_availability: avail,
            max_latency_ms: lat,
            min_dl_mbps: dl,
            min_ul_mbps: ul,
        })
        .collect()
}

/// The published availability grid for all five connectivity options.
pub fn paper_availability_grid() -> AvailabilityGrid {
    let mut grid = AvailabilityGrid::default();
    for (req, per_tech) in &AVAILABILITY_ROWS {
        for (tech, triple) in TECHNOLOGIES.iter().zip(per_tech) {
            grid.insert(
                tech,
                req,
                KpiAvailability { latency_pct: triple[0], dl_pct: triple[1], ul_pct: triple[2] },
            );
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperLink {
    OperatorA,
    OperatorB,
    Satellite,
}

impl PaperLink {
    pub fn name(self) -> &'static str {
        match self {
            PaperLink::OperatorA => "operator_a",
            PaperLink::OperatorB => "operator_b",
            PaperLink::Satellite => "satellite",
        }
    }
}

/// Round-trip quantile table fitted to the published latency statistics for
/// one link. Knots pin the published min, median, and tail percentiles; the
/// mass beyond 2,000 ms equals the published service-outage fraction, so
/// outage behaviour emerges from the latency tail itself.
pub fn rtt_quantile_table(link: PaperLink) -> QuantileTable {
    let knots: Vec<(f64, f64)> = match link {
        // Median 44.8 ms, heavy cellular tail, 1.1% beyond 2 s.
        PaperLink::OperatorA => vec![
            (0.0, 24.7),
            (0.5, 44.8),
            (0.75, 58.0),
            (0.90, 300.0),
            (0.95, 800.0),
            (0.989, 2000.0),
            (1.0, 2800.0),
        ],
        // Median 28.9 ms, 99% at 1,103 ms, 99.9% at 1,541 ms, 0.008% beyond 2 s.
        PaperLink::OperatorB => vec![
            (0.0, 20.1),
            (0.5, 28.9),
            (0.85, 60.0),
            (0.95, 400.0),
            (0.99, 1103.0),
            (0.999, 1541.0),
            (0.99992, 2000.0),
            (1.0, 2600.0),
        ],
        // Median 90.8 ms, tight jitter, 99% at 161 ms, 0.009% beyond 2 s.
        PaperLink::Satellite => vec![
            (0.0, 68.8),
            (0.25, 82.0),
            (0.5, 90.8),
            (0.75, 101.0),
            (0.9, 115.0),
            (0.99, 161.0),
            (0.999, 508.0),
            (0.99991, 2000.0),
            (1.0, 2600.0),
        ],
    };
    QuantileTable::new(knots).expect("fitted tables are valid")
}

/// Single-rate approximation of the published delivered-throughput medians.
pub fn fitted_capacity_mbps(link: PaperLink, direction: LoadDirection) -> f64 {
    match (link, direction) {
        (PaperLink::OperatorA, LoadDirection::Dl) => 100.0,
        (PaperLink::OperatorA, LoadDirection::Ul) => 52.0,
        (PaperLink::OperatorB, LoadDirection::Dl) => 88.0,
        (PaperLink::OperatorB, LoadDirection::Ul) => 48.0,
        (PaperLink::Satellite, LoadDirection::Dl) => 102.0,
        (PaperLink::Satellite, LoadDirection::Ul) => 22.0,
    }
}

/// Emulation profile for one link: one-way latency from the halved
/// round-trip table, capacity for the given load direction.
pub fn fitted_profile(link: PaperLink, direction: LoadDirection) -> LinkProfile {
    LinkProfile::new(
        link.name(),
        LatencyModel::QuantileTable { points: rtt_quantile_table(link).halved() },
        fitted_capacity_mbps(link, direction),
    )
}

/// The two-operator cellular bundle.
pub fn cellular_pair(direction: LoadDirection) -> Vec<LinkProfile> {
    vec![fitted_profile(PaperLink::OperatorA, direction), fitted_profile(PaperLink::OperatorB, direction)]
}

/// The cellular-plus-satellite bundle.
pub fn cellular_satellite_pair(direction: LoadDirection) -> Vec<LinkProfile> {
    vec![fitted_profile(PaperLink::OperatorA, direction), fitted_profile(PaperLink::Satellite, direction)]
}
