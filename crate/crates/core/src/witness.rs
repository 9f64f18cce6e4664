//! On-disk witness formats.
//!
//! * samples CSV: `index,r,phi...,value,x1..xn`, header row, LF endings,
//!   floats in shortest round-trip form.
//! * interval nest JSON: `{"phi0": .., "intervals": [{"lo", "width_exponent", "depth"}], "picked": [..]}`.
//! * polyline JSON: the path, its descent certificate and `phi(r)` samples.
//! * probes CSV: the tail of every probe path, for inspection only.
//!
//! Readers validate structure as well as syntax, so a file that parses is
//! also internally consistent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::{ProbeResult, ProbeStatus};
use crate::construction::{AngleInterval, BisectionWitness, PolarSample, MAX_DEPTH};
use crate::geometry::PolarOffset;
use crate::paths::{AngleSample, DescentCertificate, PathSpec};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid witness data: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn samples_header(dim: usize) -> Vec<String> {
    let mut h = vec!["index".to_string(), "r".to_string()];
    if dim == 2 {
        h.push("phi".into());
    } else {
        h.extend((1..dim).map(|k| format!("phi{k}")));
    }
    h.push("value".into());
    h.extend((1..=dim).map(|k| format!("x{k}")));
    h
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, FormatError> {
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

pub fn write_samples_csv(samples: &[PolarSample]) -> Result<String, FormatError> {
    let dim = samples.first().map_or(2, |s| s.point.len());
    let mut w = csv_writer();
    w.write_record(samples_header(dim))?;
    for s in samples {
        if s.point.len() != dim || s.offset.angles.len() + 1 != dim {
            return Err(invalid("samples have mixed dimensions"));
        }
        let mut row = vec![s.index.to_string(), fmt_f64(s.offset.r)];
        row.extend(s.offset.angles.iter().map(|a| fmt_f64(*a)));
        row.push(fmt_f64(s.value));
        row.extend(s.point.iter().map(|x| fmt_f64(*x)));
        w.write_record(&row)?;
    }
    finish(w)
}

pub fn read_samples_csv(text: &str) -> Result<Vec<PolarSample>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    // header has 2n + 2 columns for dimension n
    if header.len() < 6 || !header.len().is_multiple_of(2) {
        return Err(invalid(format!("unexpected column count {}", header.len())));
    }
    let dim = (header.len() - 2) / 2;
    if header != samples_header(dim) {
        return Err(invalid(format!("unexpected header {header:?}")));
    }
    let mut out: Vec<PolarSample> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64, FormatError> {
            let s = rec.get(i).ok_or_else(|| invalid(format!("row {}: missing column {i}", line + 1)))?;
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| invalid(format!("row {}: '{s}' is not a number", line + 1)))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(format!("row {}: non-finite value", line + 1)))
            }
        };
        let index: usize = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .filter(|i| *i > 0)
            .ok_or_else(|| invalid(format!("row {}: bad index", line + 1)))?;
        if out.last().is_some_and(|p| p.index >= index) {
            return Err(invalid(format!("row {}: indices must increase", line + 1)));
        }
        let r = field(1)?;
        if r < 0.0 {
            return Err(invalid(format!("row {}: negative radius", line + 1)));
        }
        let angles = (2..dim + 1).map(field).collect::<Result<Vec<_>, _>>()?;
        let value = field(dim + 1)?;
        let point = (dim + 2..2 * dim + 2).map(field).collect::<Result<Vec<_>, _>>()?;
        out.push(PolarSample {
            index,
            point,
            offset: PolarOffset::new(r, angles),
            value,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalNest {
    pub phi0: f64,
    pub intervals: Vec<AngleInterval>,
    /// Sample index picked at each level.
    pub picked: Vec<usize>,
}

impl IntervalNest {
    pub fn from_witness(w: &BisectionWitness) -> Self {
        Self {
            phi0: w.phi0,
            intervals: w.intervals.clone(),
            picked: w.picked.iter().map(|p| p.index).collect(),
        }
    }

    /// Structural checks: exact halving and nesting on the integers,
    /// increasing picks, and `phi0` inside every interval.
    pub fn validate(&self) -> Result<(), FormatError> {
        if self.intervals.is_empty() || self.intervals.len() > MAX_DEPTH as usize {
            return Err(invalid("interval nest must have 1..=40 levels"));
        }
        if self.picked.len() != self.intervals.len() {
            return Err(invalid("one pick per level is required"));
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            iv.validate().map_err(|e| invalid(e.to_string()))?;
            if iv.depth as usize != k + 1 {
                return Err(invalid(format!("level {} has depth {}", k + 1, iv.depth)));
            }
            if k > 0 && !iv.is_half_of(&self.intervals[k - 1]) {
                return Err(invalid(format!("level {} is not a half of level {k}", k + 1)));
            }
        }
        if self.picked.first() == Some(&0) || self.picked.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("picked indices must be positive and strictly increasing"));
        }
        if !self.phi0.is_finite() || !self.intervals.iter().all(|iv| iv.contains(self.phi0)) {
            return Err(invalid("phi0 must lie in every interval"));
        }
        Ok(())
    }
}

pub fn write_interval_nest(nest: &IntervalNest) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(nest)? + "\n")
}

pub fn read_interval_nest(text: &str) -> Result<IntervalNest, FormatError> {
    let nest: IntervalNest = serde_json::from_str(text)?;
    nest.validate()?;
    Ok(nest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylineReport {
    pub path: PathSpec,
    pub center: Vec<f64>,
    pub phi0: f64,
    pub certificate: DescentCertificate,
    pub angle_function: Vec<AngleSample>,
}

pub fn write_polyline_report(report: &PolylineReport) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn read_polyline_report(text: &str) -> Result<PolylineReport, FormatError> {
    let report: PolylineReport = serde_json::from_str(text)?;
    if !matches!(report.path, PathSpec::Polyline { .. }) {
        return Err(invalid("polyline report must carry a polyline path"));
    }
    report.path.check_shape().map_err(|e| invalid(e.to_string()))?;
    Ok(report)
}

pub fn read_path_spec(text: &str) -> Result<PathSpec, FormatError> {
    let path: PathSpec = serde_json::from_str(text)?;
    path.check_shape().map_err(|e| invalid(e.to_string()))?;
    Ok(path)
}

/// One row per tail entry: `probe,path,status,limit,r,value`. The path column
/// holds the compact JSON of the path; undefined values and missing limits are empty.
pub fn write_probes_csv(probes: &[ProbeResult]) -> Result<String, FormatError> {
    let mut w = csv_writer();
    w.write_record(["probe", "path", "status", "limit", "r", "value"])?;
    for (i, p) in probes.iter().enumerate() {
        let path = serde_json::to_string(&p.path)?;
        let status = match p.status {
            ProbeStatus::Converged { .. } => "converged",
            ProbeStatus::Diverged => "diverged",
            ProbeStatus::Oscillating => "oscillating",
            ProbeStatus::LeftDomain { .. } => "left_domain",
        };
        let limit = p.limit().map(fmt_f64).unwrap_or_default();
        for e in &p.tail {
            let value = e.value.map(fmt_f64).unwrap_or_default();
            w.write_record([(i + 1).to_string(), path.clone(), status.into(), limit.clone(), fmt_f64(e.r), value])?;
        }
    }
    finish(w)
}
