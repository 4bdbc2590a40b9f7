//! The feasibility matrix: measured availability classed against
//! requirements, per technology, per KPI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::requirements::{KpiAvailability, RequirementKind, UseCaseRequirement};

/// Shortfalls up to this many percentage points class as a near miss.
/// Published availability grids round to one decimal, so the boundary is
/// inclusive: a rounded gap of exactly 1.0 still reads as "within 1%".
pub const NEAR_MISS_GAP_PP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasibilityClass {
    /// Measured availability meets or exceeds the requirement.
    Pass,
    /// Short of the requirement by at most [`NEAR_MISS_GAP_PP`] points.
    NearMiss,
    Fail,
}

/// Classes one measured availability (percent) against a required
/// availability (fraction).
pub fn classify(measured_pct: f64, required_availability: f64) -> FeasibilityClass {
    let required_pct = required_availability * 100.0;
    if measured_pct >= required_pct {
        FeasibilityClass::Pass
    } else if required_pct - measured_pct <= NEAR_MISS_GAP_PP {
        FeasibilityClass::NearMiss
    } else {
        FeasibilityClass::Fail
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FeasibilityCell {
    pub measured_pct: f64,
    pub class: FeasibilityClass,
}

/// Verdict for one (technology, requirement) pair across the three KPIs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FeasibilityVerdict {
    pub latency: FeasibilityCell,
    pub dl: FeasibilityCell,
    pub ul: FeasibilityCell,
}

impl FeasibilityVerdict {
    pub fn new(availability: KpiAvailability, req: &UseCaseRequirement) -> Self {
        Self {
            latency: FeasibilityCell {
                measured_pct: availability.latency_pct,
                class: classify(availability.latency_pct, req.min_availability),
            },
            dl: FeasibilityCell {
                measured_pct: availability.dl_pct,
                class: classify(availability.dl_pct, req.min_availability),
            },
            ul: FeasibilityCell {
                measured_pct: availability.ul_pct,
                class: classify(availability.ul_pct, req.min_availability),
            },
        }
    }
}

/// Measured availability per (technology, requirement) pair.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct AvailabilityGrid {
    /// technology -> requirement name -> availability triple.
    pub cells: BTreeMap<String, BTreeMap<String, KpiAvailability>>,
}

impl AvailabilityGrid {
    pub fn insert(&mut self, technology: &str, requirement: &str, availability: KpiAvailability) {
        self.cells.entry(technology.to_string()).or_default().insert(requirement.to_string(), availability);
    }

    pub fn technologies(&self) -> Vec<String> {
        self.cells.keys().cloned().collect()
    }
}

/// Use cases a technology can serve today, per KPI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReadyCount {
    pub latency: usize,
    pub dl: usize,
    pub ul: usize,
    pub out_of: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityMatrix {
    /// Requirement names, in registry order.
    pub requirements: Vec<String>,
    pub technologies: Vec<String>,
    /// technology -> requirement -> verdict.
    pub verdicts: BTreeMap<String, BTreeMap<String, FeasibilityVerdict>>,
    /// technology -> pass counts over the use-case rows only.
    pub ready_counts: BTreeMap<String, ReadyCount>,
}

impl FeasibilityMatrix {
    pub fn verdict(&self, technology: &str, requirement: &str) -> Option<&FeasibilityVerdict> {
        self.verdicts.get(technology)?.get(requirement)
    }

    /// One row per (requirement, technology) cell triple.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("requirement,technology,latency_pct,latency_class,dl_pct,dl_class,ul_pct,ul_class\n");
        let class_str = |c: FeasibilityClass| match c {
            FeasibilityClass::Pass => "pass",
            FeasibilityClass::NearMiss => "near-miss",
            FeasibilityClass::Fail => "fail",
        };
        for req in &self.requirements {
            for tech in &self.technologies {
                if let Some(v) = self.verdict(tech, req) {
                    out.push_str(&format!(
                        "{req},{tech},{},{},{},{},{},{}\n",
                        v.latency.measured_pct,
                        class_str(v.latency.class),
                        v.dl.measured_pct,
                        class_str(v.dl.class),
                        v.ul.measured_pct,
                        class_str(v.ul.class),
                    ));
                }
            }
        }
        for tech in &self.technologies {
            if let Some(c) = self.ready_counts.get(tech) {
                out.push_str(&format!(
                    "technology-ready,{tech},{}/{},,{}/{},,{}/{},\n",
                    c.latency, c.out_of, c.dl, c.out_of, c.ul, c.out_of
                ));
            }
        }
        out
    }
}

/// Builds the full verdict grid. Every (technology, requirement) pair must
/// be present in the availability grid; gaps are collected into one error.
pub fn feasibility_matrix(
    grid: &AvailabilityGrid,
    requirements: &[UseCaseRequirement],
) -> Result<FeasibilityMatrix> {
    let mut problems: Vec<String> = requirements.iter().flat_map(|r| r.problems()).collect();
    if requirements.is_empty() {
        problems.push("no requirements given".into());
    }
    if grid.cells.is_empty() {
        problems.push("availability grid is empty".into());
    }
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems).into());
    }

    let technologies = grid.technologies();
    let mut missing = Vec::new();
    for tech in &technologies {
        for req in requirements {
            if grid.cells[tech].get(&req.name).is_none() {
                missing.push(format!("{tech}/{}", req.name));
            }
        }
    }
    if !missing.is_empty() {
        return Err(ConfigError::MissingCells(missing).into());
    }

    let use_case_total = requirements.iter().filter(|r| r.kind == RequirementKind::UseCase).count();
    let mut verdicts: BTreeMap<String, BTreeMap<String, FeasibilityVerdict>> = BTreeMap::new();
    let mut ready_counts: BTreeMap<String, ReadyCount> = BTreeMap::new();
    for tech in &technologies {
        let mut per_req = BTreeMap::new();
        let mut count = ReadyCount { latency: 0, dl: 0, ul: 0, out_of: use_case_total };
        for req in requirements {
            let verdict = FeasibilityVerdict::new(grid.cells[tech][&req.name], req);
            if req.kind == RequirementKind::UseCase {
                count.latency += (verdict.latency.class == FeasibilityClass::Pass) as usize;
                count.dl += (verdict.dl.class == FeasibilityClass::Pass) as usize;
                count.ul += (verdict.ul.class == FeasibilityClass::Pass) as usize;
            }
            per_req.insert(req.name.clone(), verdict);
        }
        verdicts.insert(tech.clone(), per_req);
        ready_counts.insert(tech.clone(), count);
    }

    Ok(FeasibilityMatrix {
        requirements: requirements.iter().map(|r| r.name.clone()).collect(),
        technologies,
        verdicts,
        ready_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(name: &str, kind: RequirementKind, avail: f64) -> UseCaseRequirement {
        UseCaseRequirement {
            name: name.into(),
            kind,
            min_availability: avail,
            max_latency_ms: 100.0,
            min_dl_mbps: 10.0,
            min_ul_mbps: 10.0,
        }
    }

    #[test]
    fn exact_match_passes() {
        assert_eq!(classify(99.0, 0.99), FeasibilityClass::Pass);
        assert_eq!(classify(99.9, 0.999), FeasibilityClass::Pass);
    }

    #[test]
    fn one_point_gap_is_a_near_miss() {
        assert_eq!(classify(98.0, 0.99), FeasibilityClass::NearMiss);
        assert_eq!(classify(98.9, 0.999), FeasibilityClass::NearMiss);
        assert_eq!(classify(98.2, 0.99), FeasibilityClass::NearMiss);
    }

    #[test]
    fn beyond_one_point_fails() {
        assert_eq!(classify(97.9, 0.99), FeasibilityClass::Fail);
        assert_eq!(classify(50.0, 0.99), FeasibilityClass::Fail);
        assert_eq!(classify(88.4, 0.90), FeasibilityClass::Fail);
    }

    #[test]
    fn raising_availability_never_worsens_the_class() {
        let rank = |c: FeasibilityClass| match c {
            FeasibilityClass::Fail => 0,
            FeasibilityClass::NearMiss => 1,
            FeasibilityClass::Pass => 2,
        };
        for req in [0.90, 0.99, 0.999] {
            let mut prev = 0;
            let mut pct = 80.0;
            while pct <= 100.0 {
                let r = rank(classify(pct, req));
                assert!(r >= prev, "class degraded at {pct} vs {req}");
                prev = r;
                pct += 0.1;
            }
        }
    }

    #[test]
    fn all_pass_and_all_fail_grids() {
        let reqs: Vec<UseCaseRequirement> =
            (0..9).map(|i| req(&format!("uc{i}"), RequirementKind::UseCase, 0.99)).collect();
        let mut grid = AvailabilityGrid::default();
        for r in &reqs {
            grid.insert("tech", &r.name, KpiAvailability { latency_pct: 100.0, dl_pct: 100.0, ul_pct: 100.0 });
        }
        let m = feasibility_matrix(&grid, &reqs).unwrap();
        assert_eq!(m.ready_counts["tech"], ReadyCount { latency: 9, dl: 9, ul: 9, out_of: 9 });

        let mut grid = AvailabilityGrid::default();
        for r in &reqs {
            grid.insert("tech", &r.name, KpiAvailability { latency_pct: 0.0, dl_pct: 0.0, ul_pct: 0.0 });
        }
        let m = feasibility_matrix(&grid, &reqs).unwrap();
        assert_eq!(m.ready_counts["tech"], ReadyCount { latency: 0, dl: 0, ul: 0, out_of: 9 });
        for v in m.verdicts["tech"].values() {
            assert_eq!(v.latency.class, FeasibilityClass::Fail);
        }
    }

    #[test]
    fn communication_type_rows_do_not_count_as_ready() {
        let reqs = vec![
            req("m2dc", RequirementKind::CommunicationType, 0.99),
            req("uc1", RequirementKind::UseCase, 0.99),
        ];
        let mut grid = AvailabilityGrid::default();
        for r in &reqs {
            grid.insert("tech", &r.name, KpiAvailability { latency_pct: 100.0, dl_pct: 100.0, ul_pct: 100.0 });
        }
        let m = feasibility_matrix(&grid, &reqs).unwrap();
        assert_eq!(m.ready_counts["tech"].out_of, 1);
        assert_eq!(m.ready_counts["tech"].latency, 1);
    }

    #[test]
    fn missing_cells_are_listed() {
        let reqs = vec![req("uc1", RequirementKind::UseCase, 0.99), req("uc2", RequirementKind::UseCase, 0.99)];
        let mut grid = AvailabilityGrid::default();
        grid.insert("tech", "uc1", KpiAvailability { latency_pct: 100.0, dl_pct: 100.0, ul_pct: 100.0 });
        let err = feasibility_matrix(&grid, &reqs).unwrap_err();
        assert!(err.to_string().contains("tech/uc2"), "{err}");
    }
}
