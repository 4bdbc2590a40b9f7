//! One-way delay models.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

/// Stochastic one-way delay of a link, in milliseconds.
///
/// Quantile tables describe a distribution by its inverse CDF: sampling draws
/// a uniform probability and interpolates linearly between knots. Tables
/// fitted from round-trip statistics must be halved before they become
/// one-way models; see [`QuantileTable::halved`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LatencyModel {
    Constant { ms: f64 },
    Normal { mean_ms: f64, std_ms: f64, floor_ms: f64 },
    LogNormal { mu: f64, sigma: f64, floor_ms: f64 },
    QuantileTable { points: QuantileTable },
}

impl LatencyModel {
    pub fn constant(ms: f64) -> Self {
        LatencyModel::Constant { ms }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            LatencyModel::Constant { ms } => {
                if !ms.is_finite() || *ms < 0.0 {
                    return Err(format!("constant delay {ms} must be finite and >= 0"));
                }
            }
            LatencyModel::Normal { mean_ms, std_ms, floor_ms } => {
                if !(mean_ms.is_finite() && std_ms.is_finite() && floor_ms.is_finite()) {
                    return Err("normal delay parameters must be finite".into());
                }
                if *std_ms < 0.0 || *floor_ms < 0.0 {
                    return Err("normal delay std and floor must be >= 0".into());
                }
            }
            LatencyModel::LogNormal { mu, sigma, floor_ms } => {
                if !(mu.is_finite() && sigma.is_finite() && floor_ms.is_finite()) {
                    return Err("log-normal delay parameters must be finite".into());
                }
                if *sigma < 0.0 || *floor_ms < 0.0 {
                    return Err("log-normal sigma and floor must be >= 0".into());
                }
            }
            LatencyModel::QuantileTable { points } => points.validate()?,
        }
        Ok(())
    }

    /// Compiled sampler; build once per channel, then draw per frame.
    pub(crate) fn sampler(&self) -> Sampler {
        match self {
            LatencyModel::Constant { ms } => Sampler::Constant(*ms),
            LatencyModel::Normal { mean_ms, std_ms, floor_ms } => {
                Sampler::Normal(Normal::new(*mean_ms, *std_ms).expect("validated"), *floor_ms)
            }
            LatencyModel::LogNormal { mu, sigma, floor_ms } => {
                Sampler::LogNormal(LogNormal::new(*mu, *sigma).expect("validated"), *floor_ms)
            }
            LatencyModel::QuantileTable { points } => Sampler::Table(points.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Sampler {
    Constant(f64),
    Normal(Normal<f64>, f64),
    LogNormal(LogNormal<f64>, f64),
    Table(QuantileTable),
}

impl Sampler {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Constant(ms) => *ms,
            Sampler::Normal(dist, floor) => dist.sample(rng).max(*floor),
            Sampler::LogNormal(dist, floor) => dist.sample(rng).max(*floor),
            Sampler::Table(table) => table.value_at(rng.gen::<f64>()),
        }
    }
}

/// Inverse-CDF knots `(p, value_ms)` covering p in [0, 1], strictly
/// increasing in p and non-decreasing in value.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct QuantileTable {
    knots: Vec<(f64, f64)>,
}

impl QuantileTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, String> {
        let table = Self { knots };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.knots.len() < 2 {
            return Err("quantile table needs at least two knots".into());
        }
        if self.knots[0].0 != 0.0 || self.knots.last().unwrap().0 != 1.0 {
            return Err("quantile table must cover p in [0, 1]".into());
        }
        for pair in self.knots.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(format!("p values must increase strictly ({} then {})", pair[0].0, pair[1].0));
            }
            if pair[1].1 < pair[0].1 {
                return Err(format!("values must be non-decreasing ({} then {})", pair[0].1, pair[1].1));
            }
        }
        for &(p, v) in &self.knots {
            if !p.is_finite() || !v.is_finite() || v < 0.0 {
                return Err(format!("knot ({p}, {v}) invalid"));
            }
        }
        Ok(())
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Linear interpolation of the inverse CDF at probability `p`.
    pub fn value_at(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let idx = self.knots.partition_point(|&(kp, _)| kp <= p);
        if idx == 0 {
            return self.knots[0].1;
        }
        if idx >= self.knots.len() {
            return self.knots.last().unwrap().1;
        }
        let (p0, v0) = self.knots[idx - 1];
        let (p1, v1) = self.knots[idx];
        v0 + (v1 - v0) * (p - p0) / (p1 - p0)
    }

    /// Same shape with every value halved: turns a round-trip table into a
    /// one-way table under the symmetric-split convention.
    pub fn halved(&self) -> Self {
        Self { knots: self.knots.iter().map(|&(p, v)| (p, v / 2.0)).collect() }
    }

    /// Loads a two-column `p,value_ms` CSV. Lines starting with `#` and
    /// a `p,value_ms` header are skipped.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut knots = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| format!("csv: {e}"))?;
            if record.len() != 2 {
                return Err(format!("expected 2 columns, got {}", record.len()));
            }
            if record[0].eq_ignore_ascii_case("p") {
                continue;
            }
            let p: f64 = record[0].parse().map_err(|e| format!("bad p {:?}: {e}", &record[0]))?;
            let v: f64 = record[1].parse().map_err(|e| format!("bad value {:?}: {e}", &record[1]))?;
            knots.push((p, v));
        }
        Self::new(knots)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self, String> {
        let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_csv_reader(file)
    }
}
