// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV input of angle series and JSON/CSV output of detection results.

use crate::circular::{wrap_angle, AngularSeries};
use crate::dependent::SubsampleConfig;
use crate::engine::{AuditEntry, DetectionResult, PcidConfig, WindowParams};
use crate::error::{PcidError, Result};
use crate::metrics::SegmentationMetrics;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Radians,
    Degrees,
}

impl FromStr for Units {
    type Err = PcidError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "radians" | "rad" => Ok(Units::Radians),
            "degrees" | "deg" => Ok(Units::Degrees),
            other => Err(PcidError::config(format!("unknown units '{other}'"))),
        }
    }
}

/// Which CSV field holds the angles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    /// 1-based position.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

impl Default for Column {
    fn default() -> Self {
        Column::Index(1)
    }
}

impl FromStr for Column {
    type Err = PcidError;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(0) => Err(PcidError::config("column positions are 1-based")),
            Ok(i) => Ok(Column::Index(i)),
            Err(_) => Ok(Column::Name(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub path: PathBuf,
    pub units: Units,
    pub column: Column,
    pub header: bool,
}

impl SeriesFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            units: Units::Radians,
            column: Column::default(),
            header: false,
        }
    }
}

pub fn load_series(file: &SeriesFile) -> Result<AngularSeries> {
    let handle = File::open(&file.path).map_err(|e| PcidError::Io(format!("{}: {e}", file.path.display())))?;
    parse_series(handle, file.units, &file.column, file.header)
}

/// One angle per record from `column`, converted to radians and wrapped.
pub fn parse_series<R: Read>(reader: R, units: Units, column: &Column, header: bool) -> Result<AngularSeries> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let position = match column {
        Column::Index(i) => i - 1,
        Column::Name(name) => {
            if !header {
                return Err(PcidError::config("selecting a column by name needs --header"));
            }
            let headers = csv.headers().map_err(csv_error)?;
            headers.iter().position(|h| h == name).ok_or_else(|| PcidError::Parse {
                line: 1,
                message: format!("no column named '{name}'"),
            })?
        }
    };
    let mut values = Vec::new();
    for record in csv.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = record.get(position).ok_or_else(|| PcidError::Parse {
            line,
            message: format!("missing column {}", position + 1),
        })?;
        let raw: f64 = field.replace('\u{2212}', "-").parse().map_err(|_| PcidError::Parse {
            line,
            message: format!("'{field}' is not a number"),
        })?;
        let radians = match units {
            Units::Radians => raw,
            Units::Degrees => raw.to_radians(),
        };
        let angle = wrap_angle(radians).map_err(|_| PcidError::Parse {
            line,
            message: format!("'{field}' is not finite"),
        })?;
        values.push(angle.value());
    }
    if values.is_empty() {
        return Err(PcidError::Parse {
            line: 0,
            message: "input contains no observations".into(),
        });
    }
    AngularSeries::new(values)
}

fn csv_error(e: csv::Error) -> PcidError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => PcidError::Io(io.to_string()),
        other => PcidError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes one angle per line, in radians, with full precision.
pub fn write_series<W: Write>(mut out: W, series: &AngularSeries) -> Result<()> {
    for v in series.values() {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentMean {
    pub start: usize,
    pub end: usize,
    /// Radians in `[0, 2π)`.
    pub mean: f64,
    /// Same direction in `[−π, π)`.
    pub mean_signed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub length: usize,
    pub lambda: usize,
    pub window: usize,
    pub seed: u64,
    pub gamma: Option<f64>,
    /// `(α, B)` of the first window; see `windows` for the rest.
    pub alpha: f64,
    pub permutations: u64,
    pub allow_sub_milli_alpha: bool,
    pub windows: Vec<WindowParams>,
    pub subsample: Option<SubsampleConfig>,
}

/// Output of `pcid detect`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub changepoints: Vec<usize>,
    pub n_hat: usize,
    pub segment_means: Vec<SegmentMean>,
    pub config: ConfigEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<AuditEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<SegmentationMetrics>,
}

impl ResultDocument {
    pub fn new(
        length: usize,
        result: &DetectionResult,
        cfg: &PcidConfig,
        subsample: Option<SubsampleConfig>,
        with_audit: bool,
    ) -> Self {
        let mut segment_means = Vec::with_capacity(result.segment_means.len());
        let mut start = 1;
        for (k, mean) in result.segment_means.iter().enumerate() {
            let end = result.changepoints.get(k).copied().unwrap_or(length);
            segment_means.push(SegmentMean {
                start,
                end,
                mean: mean.value(),
                mean_signed: mean.signed(),
            });
            start = end + 1;
        }
        let first = result.windows.first();
        Self {
            changepoints: result.changepoints.clone(),
            n_hat: result.n_hat,
            segment_means,
            config: ConfigEcho {
                length,
                lambda: cfg.lambda,
                window: cfg.window,
                seed: cfg.seed,
                gamma: cfg.significance.gamma(),
                alpha: first.map_or(f64::NAN, |w| w.alpha),
                permutations: first.map_or(0, |w| w.permutations),
                allow_sub_milli_alpha: cfg.allow_sub_milli_alpha,
                windows: result.windows.clone(),
                subsample,
            },
            audit: with_audit.then(|| result.audit.clone()),
            metrics: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| PcidError::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PcidError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// CSV with columns `t, theta, fitted`: the data and the fitted piecewise
/// constant mean direction.
pub fn write_fit_csv(path: &Path, series: &AngularSeries, result: &DetectionResult) -> Result<()> {
    let file = File::create(path).map_err(|e| PcidError::Io(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["t", "theta", "fitted"]).map_err(csv_error)?;
    let mut segment = 0;
    for (k, theta) in series.values().iter().enumerate() {
        let t = k + 1;
        while segment < result.changepoints.len() && t > result.changepoints[segment] {
            segment += 1;
        }
        let fitted = result.segment_means.get(segment).map_or(f64::NAN, |m| m.value());
        w.write_record([t.to_string(), theta.to_string(), fitted.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{pcid_detect, IntervalCache};
    use std::f64::consts::{PI, TAU};

    fn parse(text: &str, units: Units) -> Result<AngularSeries> {
        parse_series(text.as_bytes(), units, &Column::default(), false)
    }

    #[test]
    fn unit_conversion_and_wrapping() {
        let s = parse("180\n", Units::Degrees).unwrap();
        assert!((s.values()[0] - PI).abs() < 1e-15);
        let s = parse("-0.1\n", Units::Radians).unwrap();
        assert!((s.values()[0] - (TAU - 0.1)).abs() < 1e-15);
        let s = parse("\u{2212}0.1\n", Units::Radians).unwrap();
        assert!((s.values()[0] - (TAU - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn malformed_rows_name_their_line() {
        match parse("0.5\n1.0\nabc\n", Units::Radians) {
            Err(PcidError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("", Units::Radians), Err(PcidError::Parse { .. })));
        assert!(matches!(parse("inf\n", Units::Radians), Err(PcidError::Parse { .. })));
    }

    #[test]
    fn named_columns() {
        let text = "t,theta\n1,0.5\n2,1.5\n";
        let s = parse_series(text.as_bytes(), Units::Radians, &Column::Name("theta".into()), true).unwrap();
        assert_eq!(s.values(), &[0.5, 1.5]);
        let s = parse_series(text.as_bytes(), Units::Radians, &Column::Index(2), true).unwrap();
        assert_eq!(s.values(), &[0.5, 1.5]);
        assert!(parse_series(text.as_bytes(), Units::Radians, &Column::Name("x".into()), true).is_err());
        assert!("0".parse::<Column>().is_err());
    }

    #[test]
    fn series_round_trip() {
        let values: Vec<f64> = (0..50).map(|k| (k as f64 * 0.731).rem_euclid(TAU)).collect();
        let series = AngularSeries::new(values).unwrap();
        let mut buf = Vec::new();
        write_series(&mut buf, &series).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap(), Units::Radians).unwrap();
        for (a, b) in series.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn document_round_trip() {
        let values: Vec<f64> = (1..=60).map(|t| if t <= 30 { 0.2 } else { 3.0 }).collect();
        let series = AngularSeries::new(values).unwrap();
        let cfg = PcidConfig::default();
        let r = pcid_detect(&series, 1, 60, &cfg, &mut IntervalCache::new()).unwrap();
        let doc = ResultDocument::new(60, &r, &cfg, None, true);
        assert_eq!(doc.segment_means.len(), 2);
        assert_eq!((doc.segment_means[0].start, doc.segment_means[0].end), (1, 30));
        let back = ResultDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
    }
}
