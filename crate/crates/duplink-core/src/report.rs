//! Experiment execution and report assembly.
//!
//! `run_experiment` drives the configured campaigns over emulated links,
//! persists every series as CSV, and writes a JSON report whose numbers are
//! recomputable from those files alone; `analyze_series` is that
//! recomputation, shared by the CLI.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accounting::LinkShares;
use crate::campaign::{LoadDirection, ProbeRun};
use crate::error::{ConfigError, Error, Result};
use crate::feasibility::{feasibility_matrix, AvailabilityGrid, FeasibilityMatrix};
use crate::requirements::{availability_against, UseCaseRequirement};
use crate::scenario::Scenario;
use crate::series::{MetricKind, SampleSeries};
use crate::sim::{load_campaign, probe_campaign, EmulatedNetwork};
use crate::stats::{dkw_epsilon, summarize, DistributionSummary, DkwBound, EmpiricalDistribution, WilsonBound};

/// Confidence level used for the report's interval columns.
pub const REPORT_ALPHA: f64 = 0.01;
/// CDF levels where latency tails get pointwise Wilson bounds.
pub const WILSON_LEVELS: [f64; 3] = [0.9, 0.99, 0.999];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// False when any series came from live sockets.
    pub reproducible: bool,
}

/// Summary plus confidence bounds for one series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub metric: MetricKind,
    pub samples: usize,
    pub summary: DistributionSummary,
    pub dkw: Option<DkwBound>,
    /// Pointwise tail bounds; skipped at levels the outage mass swallows.
    pub wilson: Vec<WilsonBound>,
    /// Series CSV behind these numbers, relative to the report.
    pub series_file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadBlock {
    pub direction: LoadDirection,
    pub metrics: Vec<MetricReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub provenance: Provenance,
    pub latency: Vec<MetricReport>,
    pub loads: Vec<LoadBlock>,
    pub link_shares: Option<LinkShares>,
    pub feasibility: Option<FeasibilityMatrix>,
    pub violations: Vec<String>,
}

/// Builds the summary and confidence bounds for one series.
pub fn metric_report(series: &SampleSeries, alpha: f64, series_file: Option<String>) -> Result<MetricReport> {
    let summary = summarize(series)?;
    let n = series.len() as u64;
    let dkw = (n > 0).then(|| dkw_epsilon(n, alpha)).transpose()?.map(|epsilon| DkwBound { epsilon, alpha, n });

    let mut wilson = Vec::new();
    if series.metric() == MetricKind::RttMs {
        let valid: Vec<f64> = series.points().iter().filter(|p| !p.outage).filter_map(|p| p.value).collect();
        if !valid.is_empty() {
            let dist = EmpiricalDistribution::from_samples(valid.iter().copied())?;
            for &level in &WILSON_LEVELS {
                // The tail bound only exists while the level stays below the
                // outage mass.
                if level * n as f64 <= valid.len() as f64 {
                    let x = dist.quantile(level)?;
                    let k = valid.iter().filter(|&&v| v <= x).count() as u64;
                    wilson.push(crate::stats::wilson_bound_at(k, n, alpha, level)?);
                }
            }
        }
    }

    Ok(MetricReport {
        label: series.meta.label.clone(),
        metric: series.metric(),
        samples: series.len(),
        summary,
        dkw,
        wilson,
        series_file,
    })
}

fn series_filename(prefix: &str, label: &str, metric: MetricKind) -> String {
    let metric_tag = match metric {
        MetricKind::RttMs => "rtt",
        MetricKind::ThroughputMbps => "throughput",
    };
    format!("series/{prefix}{label}_{metric_tag}.csv")
}

fn write_cdf_curve(series: &SampleSeries, path: &Path) -> Result<()> {
    let values: Vec<f64> = series.points().iter().filter(|p| !p.outage).filter_map(|p| p.value).collect();
    if values.is_empty() {
        return Ok(());
    }
    let dist = EmpiricalDistribution::from_samples(values)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = String::from("value,cdf\n");
    for (x, f) in dist.steps() {
        out.push_str(&format!("{x},{f}\n"));
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Runs every campaign a scenario configures, persists series and report
/// under `out_dir`, and returns the report.
pub fn run_experiment(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let problems = scenario.problems();
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems).into());
    }
    std::fs::create_dir_all(out_dir)?;

    let mut violations = Vec::new();
    let mut latency_reports = Vec::new();
    let mut link_shares = None;
    let mut probe_series: Option<SampleSeries> = None;

    let persist = |series: &SampleSeries, file: String| -> Result<MetricReport> {
        series.write_csv(&out_dir.join(&file))?;
        write_cdf_curve(series, &out_dir.join(format!("cdf/{}", file.trim_start_matches("series/"))))?;
        metric_report(series, REPORT_ALPHA, Some(file))
    };

    if let Some(probe_cfg) = &scenario.probe {
        let mut net = EmulatedNetwork::new(&scenario.links, scenario.policy.clone(), scenario.seed, "probe", &scenario.traces)?;
        net.scenario_name = Some(scenario.name.clone());
        let run: ProbeRun = probe_campaign(&mut net, probe_cfg, scenario.duration_s)?;
        violations.extend(run.violations.iter().cloned());
        latency_reports.push(persist(&run.mc, series_filename("", "mc", MetricKind::RttMs))?);
        for series in &run.per_link {
            latency_reports.push(persist(series, series_filename("", &series.meta.label, MetricKind::RttMs))?);
        }
        if scenario.emit_event_log {
            run.events.write_jsonl(&out_dir.join("events_probe.jsonl"))?;
        }
        link_shares = Some(run.shares);
        probe_series = Some(run.mc);
    }

    let mut load_blocks = Vec::new();
    let mut load_mc: BTreeMap<LoadDirection, SampleSeries> = BTreeMap::new();
    for load_cfg in &scenario.loads {
        let campaign_tag = format!("load-{}", load_cfg.direction);
        let mut net = EmulatedNetwork::new(&scenario.links, scenario.policy.clone(), scenario.seed, &campaign_tag, &scenario.traces)?;
        net.scenario_name = Some(scenario.name.clone());
        let run = load_campaign(&mut net, load_cfg, scenario.duration_s, scenario.emit_event_log)?;
        violations.extend(run.violations.iter().cloned());
        let prefix = format!("{}_", load_cfg.direction);
        let mut metrics = vec![persist(&run.mc, series_filename(&prefix, "mc", MetricKind::ThroughputMbps))?];
        for series in &run.per_link {
            metrics.push(persist(series, series_filename(&prefix, &series.meta.label, MetricKind::ThroughputMbps))?);
        }
        if scenario.emit_event_log && !run.events.is_empty() {
            run.events.write_jsonl(&out_dir.join(format!("events_load_{}.jsonl", load_cfg.direction)))?;
        }
        load_blocks.push(LoadBlock { direction: load_cfg.direction, metrics });
        load_mc.insert(load_cfg.direction, run.mc);
    }

    // Feasibility needs the full KPI triple for the multi-connectivity path.
    let feasibility = match (scenario.requirement_set()?, &probe_series, load_mc.get(&LoadDirection::Dl), load_mc.get(&LoadDirection::Ul)) {
        (Some(requirements), Some(lat), Some(dl), Some(ul)) => {
            let mut grid = AvailabilityGrid::default();
            let tech = format!("{}-{}", scenario.policy.label(), scenario.name);
            for req in &requirements {
                grid.insert(&tech, &req.name, availability_against(lat, dl, ul, req)?);
            }
            Some(feasibility_matrix(&grid, &requirements)?)
        }
        _ => None,
    };

    let report = RunReport {
        scenario: scenario.name.clone(),
        provenance: Provenance {
            config_hash: scenario.config_hash()?,
            seed: scenario.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            reproducible: true,
        },
        latency: latency_reports,
        loads: load_blocks,
        link_shares,
        feasibility,
        violations,
    };
    write_report(&report, out_dir)?;
    Ok(report)
}

pub fn write_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(report)?;
    std::fs::File::create(out_dir.join("report.json"))?.write_all(json.as_bytes())?;
    std::fs::File::create(out_dir.join("summary.csv"))?.write_all(summary_csv(report).as_bytes())?;
    if let Some(matrix) = &report.feasibility {
        std::fs::File::create(out_dir.join("feasibility.csv"))?.write_all(matrix.to_csv().as_bytes())?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// Tabular rendering of every metric block, one row per series.
pub fn summary_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "block,label,metric,samples,outage_pct,min,median,mean,max,std_dev,p10,p5,p1,p99,p99_9,p99_99,dkw_epsilon\n",
    );
    let mut push_row = |block: &str, m: &MetricReport| {
        let s = &m.summary;
        out.push_str(&format!(
            "{block},{},{:?},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            m.label,
            m.metric,
            m.samples,
            s.outage_probability_pct,
            fmt_opt(s.min),
            fmt_opt(s.median),
            fmt_opt(s.mean),
            fmt_opt(s.max),
            fmt_opt(s.std_dev),
            fmt_opt(s.p10),
            fmt_opt(s.p5),
            fmt_opt(s.p1),
            fmt_opt(s.p99),
            fmt_opt(s.p99_9),
            fmt_opt(s.p99_99),
            fmt_opt(m.dkw.map(|d| d.epsilon)),
        ));
    };
    for m in &report.latency {
        push_row("latency", m);
    }
    for block in &report.loads {
        for m in &block.metrics {
            push_row(&format!("load-{}", block.direction), m);
        }
    }
    out
}

/// Recomputes metric reports from persisted series files.
pub fn analyze_series(paths: &[PathBuf], alpha: f64) -> Result<Vec<MetricReport>> {
    if paths.is_empty() {
        return Err(Error::Series("no series files given".into()));
    }
    paths
        .iter()
        .map(|path| {
            let series = SampleSeries::read_csv(path)?;
            metric_report(&series, alpha, Some(path.display().to_string()))
        })
        .collect()
}

/// Feasibility matrix from the built-in published availability grid.
pub fn paper_mode_matrix() -> Result<FeasibilityMatrix> {
    feasibility_matrix(&crate::fixtures::paper_availability_grid(), &crate::fixtures::requirement_registry())
}

/// Per-technology series triple on disk, for simulation-mode matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesTriple {
    pub latency: PathBuf,
    pub dl: PathBuf,
    pub ul: PathBuf,
}

/// Builds the matrix from measured series: one triple of CSV files per
/// technology, availability evaluated against each requirement.
pub fn matrix_from_series(
    triples: &BTreeMap<String, SeriesTriple>,
    requirements: &[UseCaseRequirement],
) -> Result<FeasibilityMatrix> {
    let mut grid = AvailabilityGrid::default();
    for (tech, triple) in triples {
        let lat = SampleSeries::read_csv(&triple.latency)?;
        let dl = SampleSeries::read_csv(&triple.dl)?;
        let ul = SampleSeries::read_csv(&triple.ul)?;
        for req in requirements {
            grid.insert(tech, &req.name, availability_against(&lat, &dl, &ul, req)?);
        }
    }
    feasibility_matrix(&grid, requirements)
}
