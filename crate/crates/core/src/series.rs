//! Sampled curves and distributions, and their CSV / JSON files.
//!
//! CSV files hold one series with the header `x,value`. JSON files hold a
//! [`SeriesDocument`]: a versioned envelope with a meta block and every series.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 2] = ["x", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// Nondecreasing values in `[0, 1]`.
    Cdf,
    /// Histogram density at bin centers.
    Pdf,
    /// Any sampled function.
    Curve,
    /// Annotated positions (nulls, lobes, thresholds).
    Markers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSeries {
    pub label: String,
    pub kind: SeriesKind,
    pub points: Vec<(f64, f64)>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl DistributionSeries {
    pub fn new(label: impl Into<String>, kind: SeriesKind, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            kind,
            points,
            meta: Map::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Checks the structural invariants of the series kind.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::param("series", format!("`{}`: {reason}", self.label)));
        if self.points.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return bad("non-finite point".into());
        }
        if let Some(w) = self.points.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return bad(format!("x not strictly increasing at {} -> {}", w[0].0, w[1].0));
        }
        match self.kind {
            SeriesKind::Cdf => {
                if self.values().any(|v| !(0.0..=1.0).contains(&v)) {
                    return bad("CDF value outside [0, 1]".into());
                }
                if self.points.windows(2).any(|w| w[1].1 < w[0].1) {
                    return bad("CDF decreases".into());
                }
            }
            SeriesKind::Pdf => {
                if self.values().any(|v| v < 0.0) {
                    return bad("negative density".into());
                }
                let mass = self.histogram_mass();
                if self.points.len() > 1 && (mass - 1.0).abs() > 1e-6 {
                    return bad(format!("histogram integrates to {mass}"));
                }
            }
            SeriesKind::Curve | SeriesKind::Markers => {}
        }
        Ok(())
    }

    /// Integral of a histogram with uniform bins centered on the x values.
    pub fn histogram_mass(&self) -> f64 {
        if self.points.len() < 2 {
            return self.values().sum();
        }
        let width = (self.points[self.points.len() - 1].0 - self.points[0].0) / (self.points.len() - 1) as f64;
        self.values().sum::<f64>() * width
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(io_err(path))?;
        w.write_record(CSV_HEADER).map_err(io_err(path))?;
        for (x, v) in &self.points {
            w.write_record([x.to_string(), v.to_string()]).map_err(io_err(path))?;
        }
        w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Reads a two-column CSV; label and kind come from the caller since CSV carries only points.
    pub fn read_csv(path: &Path, label: impl Into<String>, kind: SeriesKind) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(io_err(path))?;
        let header = r.headers().map_err(io_err(path))?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Io(format!("{}: unexpected header {:?}", path.display(), header)));
        }
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io_err(path))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Io(format!("{}: bad number in row {:?}", path.display(), rec)))
            };
            points.push((parse(0)?, parse(1)?));
        }
        Ok(Self::new(label, kind, points))
    }
}

fn io_err<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

/// Versioned JSON envelope holding every series a command produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesDocument {
    pub schema_version: u32,
    pub command: String,
    #[serde(default)]
    pub meta: Map<String, Value>,
    pub series: Vec<DistributionSeries>,
}

impl SeriesDocument {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            meta: Map::new(),
            series: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Io(format!("unsupported schema version {}", doc.schema_version)));
        }
        Ok(doc)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(io_err(path))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(io_err(path))?)
    }
}
