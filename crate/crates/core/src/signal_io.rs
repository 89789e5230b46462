//! Inertial-sensor recordings: parsing, validation, trimming, windowing and
//! persistence.
//!
//! Two on-disk formats are supported, both documented in `docs/formats.md`:
//!
//! * CSV: a `# key=value;...` metadata comment on line 1, a `t_ms,x,y,z`
//!   header on line 2, then one sample per row.
//! * JSONL: one metadata object on the first line followed by one object per
//!   sample.
//!
//! Units are carried implicitly (m/s² for the accelerometer, rad/s for the
//! gyroscope) and never converted.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("validation failed: {0}")]
    Validation(&'static str),
    #[error("recording too short: {0}")]
    TooShort(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SignalError {
    fn from(e: std::io::Error) -> Self {
        SignalError::Io(e.to_string())
    }
}

pub const INV_MONOTONE: &str = "timestamps strictly increasing";
pub const INV_FINITE: &str = "finite samples";
pub const INV_RATE: &str = "sample rate positive";
pub const INV_MIN_SAMPLES: &str = "at least 2 samples";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    Accelerometer,
    Gyroscope,
}

impl Sensor {
    pub fn as_str(self) -> &'static str {
        match self {
            Sensor::Accelerometer => "accelerometer",
            Sensor::Gyroscope => "gyroscope",
        }
    }

    /// Short prefix used in feature names.
    pub fn short(self) -> &'static str {
        match self {
            Sensor::Accelerometer => "acc",
            Sensor::Gyroscope => "gyro",
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sensor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accelerometer" | "acc" => Ok(Sensor::Accelerometer),
            "gyroscope" | "gyro" => Ok(Sensor::Gyroscope),
            other => Err(format!("unknown sensor '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Identifies where a recording (or a window cut from it) came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub session_id: String,
    pub session_date: NaiveDate,
    pub device_id: String,
    pub sensor: Sensor,
}

impl RecordingMeta {
    /// True when both describe the same session, ignoring the sensor.
    pub fn same_session(&self, other: &RecordingMeta) -> bool {
        self.subject_id == other.subject_id
            && self.session_id == other.session_id
            && self.session_date == other.session_date
            && self.device_id == other.device_id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t_ms: i64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A validated sequence of timestamped 3-axis samples from one sensor of one
/// session. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRecording {
    meta: RecordingMeta,
    sample_rate_hz: f64,
    samples: Vec<Sample>,
}

impl SensorRecording {
    pub fn new(
        meta: RecordingMeta,
        sample_rate_hz: f64,
        samples: Vec<Sample>,
    ) -> Result<Self, SignalError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(SignalError::Validation(INV_RATE));
        }
        if samples.len() < 2 {
            return Err(SignalError::Validation(INV_MIN_SAMPLES));
        }
        if samples
            .iter()
            .any(|s| !(s.x.is_finite() && s.y.is_finite() && s.z.is_finite()))
        {
            return Err(SignalError::Validation(INV_FINITE));
        }
        if samples.windows(2).any(|w| w[1].t_ms <= w[0].t_ms) {
            return Err(SignalError::Validation(INV_MONOTONE));
        }
        Ok(Self {
            meta,
            sample_rate_hz,
            samples,
        })
    }

    pub fn meta(&self) -> &RecordingMeta {
        &self.meta
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn axis(&self, axis: Axis) -> Vec<f64> {
        self.samples.iter().map(|s| axis.pick(s)).collect()
    }

    /// Returns a copy with the three axes replaced, keeping timestamps and
    /// metadata. Used to carry filtered traces through windowing.
    pub fn with_axes(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Self, SignalError> {
        let n = self.samples.len();
        if x.len() != n || y.len() != n || z.len() != n {
            return Err(SignalError::InvalidArgument(format!(
                "axis lengths ({}, {}, {}) differ from recording length {n}",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| Sample {
                t_ms: s.t_ms,
                x: x[i],
                y: y[i],
                z: z[i],
            })
            .collect();
        SensorRecording::new(self.meta.clone(), self.sample_rate_hz, samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn pick(self, s: &Sample) -> f64 {
        match self {
            Axis::X => s.x,
            Axis::Y => s.y,
            Axis::Z => s.z,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis '{other}'")),
        }
    }
}

/// `N` consecutive samples of one recording, with the magnitude series
/// precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub meta: RecordingMeta,
    pub start_index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub mag: Vec<f64>,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
}

impl Window {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The four series in canonical order: X, Y, Z, magnitude.
    pub fn series(&self) -> [&[f64]; 4] {
        [&self.x, &self.y, &self.z, &self.mag]
    }
}

/// Euclidean norm of a 3-axis sample.
pub fn magnitude(x: f64, y: f64, z: f64) -> f64 {
    (x * x + y * y + z * z).sqrt()
}

/// Drops every sample closer than `trim_ms` to either end of the recording.
pub fn trim_edges(rec: &SensorRecording, trim_ms: u32) -> Result<SensorRecording, SignalError> {
    if trim_ms == 0 {
        return Ok(rec.clone());
    }
    let first = rec.samples[0].t_ms;
    let last = rec.samples[rec.samples.len() - 1].t_ms;
    let lo = first + i64::from(trim_ms);
    let hi = last - i64::from(trim_ms);
    let kept: Vec<Sample> = rec
        .samples
        .iter()
        .filter(|s| s.t_ms >= lo && s.t_ms <= hi)
        .copied()
        .collect();
    if kept.len() < 2 {
        return Err(SignalError::TooShort(format!(
            "{} ms recording leaves {} samples after trimming {trim_ms} ms from each end",
            last - first,
            kept.len()
        )));
    }
    SensorRecording::new(rec.meta.clone(), rec.sample_rate_hz, kept)
}

/// Number of samples in a window of `window_s` seconds at the nominal rate.
pub fn window_len(window_s: f64, sample_rate_hz: f64) -> usize {
    (window_s * sample_rate_hz).round().max(0.0) as usize
}

/// Hop between window starts for a given overlap fraction (at least one sample).
pub fn hop_len(window_len: usize, overlap_fraction: f64) -> usize {
    ((window_len as f64 * (1.0 - overlap_fraction)).round() as usize).max(1)
}

/// Cuts a recording into fixed-length windows. Window length is counted in
/// samples at the nominal rate; a trailing partial window is discarded.
pub fn segment_windows(
    rec: &SensorRecording,
    window_s: f64,
    overlap_fraction: f64,
) -> Result<Vec<Window>, SignalError> {
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(SignalError::InvalidArgument(format!(
            "window length must be positive, got {window_s}"
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(SignalError::InvalidArgument(format!(
            "overlap fraction must lie in [0, 1), got {overlap_fraction}"
        )));
    }
    let len = window_len(window_s, rec.sample_rate_hz);
    if len < 2 {
        return Err(SignalError::InvalidArgument(format!(
            "{window_s} s at {} Hz gives fewer than 2 samples per window",
            rec.sample_rate_hz
        )));
    }
    if rec.len() < len {
        return Err(SignalError::TooShort(format!(
            "{} samples cannot hold a {len}-sample window",
            rec.len()
        )));
    }
    let hop = hop_len(len, overlap_fraction);
    let windows = (0..=(rec.len() - len))
        .step_by(hop)
        .map(|start| {
            let chunk = &rec.samples[start..start + len];
            let x: Vec<f64> = chunk.iter().map(|s| s.x).collect();
            let y: Vec<f64> = chunk.iter().map(|s| s.y).collect();
            let z: Vec<f64> = chunk.iter().map(|s| s.z).collect();
            let mag = chunk.iter().map(|s| magnitude(s.x, s.y, s.z)).collect();
            Window {
                meta: rec.meta.clone(),
                start_index: start,
                x,
                y,
                z,
                mag,
                sample_rate_hz: rec.sample_rate_hz,
                duration_s: len as f64 / rec.sample_rate_hz,
            }
        })
        .collect();
    Ok(windows)
}

// ---------------------------------------------------------------------------
// Parsing

pub fn parse_recording<R: BufRead>(
    input: R,
    format: Format,
) -> Result<SensorRecording, SignalError> {
    match format {
        Format::Csv => parse_csv(input),
        Format::Jsonl => parse_jsonl(input),
    }
}

/// Guesses the format from a file extension (`.csv` or `.jsonl`).
pub fn format_for_path(path: &std::path::Path) -> Option<Format> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(Format::Csv),
        "jsonl" => Some(Format::Jsonl),
        _ => None,
    }
}

pub fn read_recording(path: &std::path::Path) -> Result<SensorRecording, SignalError> {
    let format = format_for_path(path).ok_or_else(|| {
        SignalError::InvalidArgument(format!("cannot infer format of {}", path.display()))
    })?;
    let file = std::fs::File::open(path)
        .map_err(|e| SignalError::Io(format!("{}: {e}", path.display())))?;
    parse_recording(std::io::BufReader::new(file), format)
}

pub fn write_recording_file(
    path: &std::path::Path,
    rec: &SensorRecording,
    format: Format,
) -> Result<(), SignalError> {
    let file = std::fs::File::create(path)
        .map_err(|e| SignalError::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    write_recording(&mut w, rec, format)?;
    w.flush()?;
    Ok(())
}

struct MetaFields {
    subject: Option<String>,
    session: Option<String>,
    date: Option<NaiveDate>,
    device: Option<String>,
    sensor: Option<Sensor>,
    rate_hz: Option<f64>,
}

impl MetaFields {
    fn empty() -> Self {
        Self {
            subject: None,
            session: None,
            date: None,
            device: None,
            sensor: None,
            rate_hz: None,
        }
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), SignalError> {
        let perr = |reason: String| SignalError::Parse { line, reason };
        match key {
            "subject" => self.subject = Some(value.to_string()),
            "session" => self.session = Some(value.to_string()),
            "date" => {
                self.date = Some(
                    NaiveDate::parse_from_str(value, "%Y-%m-%d")
                        .map_err(|e| perr(format!("bad date '{value}': {e}")))?,
                )
            }
            "device" => self.device = Some(value.to_string()),
            "sensor" => self.sensor = Some(value.parse().map_err(perr)?),
            "rate_hz" => {
                self.rate_hz = Some(
                    value
                        .parse()
                        .map_err(|_| perr(format!("bad rate_hz '{value}'")))?,
                )
            }
            other => return Err(perr(format!("unknown metadata key '{other}'"))),
        }
        Ok(())
    }

    fn finish(self, line: usize) -> Result<(RecordingMeta, f64), SignalError> {
        let missing = |k: &str| SignalError::Parse {
            line,
            reason: format!("missing metadata key '{k}'"),
        };
        let meta = RecordingMeta {
            subject_id: self.subject.ok_or_else(|| missing("subject"))?,
            session_id: self.session.ok_or_else(|| missing("session"))?,
            session_date: self.date.ok_or_else(|| missing("date"))?,
            device_id: self.device.ok_or_else(|| missing("device"))?,
            sensor: self.sensor.ok_or_else(|| missing("sensor"))?,
        };
        Ok((meta, self.rate_hz.ok_or_else(|| missing("rate_hz"))?))
    }
}

fn parse_csv<R: BufRead>(input: R) -> Result<SensorRecording, SignalError> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(SignalError::Parse {
        line: 1,
        reason: "empty input".into(),
    })?;
    let first = first?;
    let body = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| SignalError::Parse {
            line: 1,
            reason: "expected '# key=value;...' metadata comment".into(),
        })?;
    let mut fields = MetaFields::empty();
    for pair in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| SignalError::Parse {
            line: 1,
            reason: format!("expected key=value, got '{pair}'"),
        })?;
        fields.set(k.trim(), v.trim(), 1)?;
    }
    let (meta, rate) = fields.finish(1)?;

    let mut samples = Vec::new();
    let mut seen_header = false;
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !seen_header {
            seen_header = true;
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cols == ["t_ms", "x", "y", "z"] {
                continue;
            }
            return Err(SignalError::Parse {
                line: lineno,
                reason: format!("expected header 't_ms,x,y,z', got '{trimmed}'"),
            });
        }
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(SignalError::Parse {
                line: lineno,
                reason: format!("expected 4 columns, got {}", cols.len()),
            });
        }
        let t_ms = cols[0].parse::<i64>().map_err(|_| SignalError::Parse {
            line: lineno,
            reason: format!("bad timestamp '{}'", cols[0]),
        })?;
        let mut v = [0.0; 3];
        for (slot, col) in v.iter_mut().zip(&cols[1..]) {
            *slot = col.parse::<f64>().map_err(|_| SignalError::Parse {
                line: lineno,
                reason: format!("bad number '{col}'"),
            })?;
        }
        samples.push(Sample {
            t_ms,
            x: v[0],
            y: v[1],
            z: v[2],
        });
    }
    SensorRecording::new(meta, rate, samples)
}

fn json_number(v: &Value, key: &str, line: usize) -> Result<f64, SignalError> {
    match v.get(key) {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| SignalError::Parse {
            line,
            reason: format!("'{key}' is not representable as f64"),
        }),
        // Non-finite values cannot be JSON numbers; accept them as strings so
        // the validator reports them as such.
        Some(Value::String(s)) => s.trim().parse::<f64>().map_err(|_| SignalError::Parse {
            line,
            reason: format!("'{key}' is not a number: '{s}'"),
        }),
        Some(_) => Err(SignalError::Parse {
            line,
            reason: format!("'{key}' is not a number"),
        }),
        None => Err(SignalError::Parse {
            line,
            reason: format!("missing field '{key}'"),
        }),
    }
}

fn parse_jsonl<R: BufRead>(input: R) -> Result<SensorRecording, SignalError> {
    let mut meta: Option<(RecordingMeta, f64)> = None;
    let mut samples = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| SignalError::Parse {
            line: lineno,
            reason: e.to_string(),
        })?;
        if !value.is_object() {
            return Err(SignalError::Parse {
                line: lineno,
                reason: "expected a JSON object".into(),
            });
        }
        if meta.is_none() {
            let mut fields = MetaFields::empty();
            for key in ["subject", "session", "date", "device", "sensor"] {
                if let Some(v) = value.get(key) {
                    let s = v.as_str().ok_or_else(|| SignalError::Parse {
                        line: lineno,
                        reason: format!("'{key}' must be a string"),
                    })?;
                    fields.set(key, s, lineno)?;
                }
            }
            if value.get("rate_hz").is_some() {
                fields.rate_hz = Some(json_number(&value, "rate_hz", lineno)?);
            }
            meta = Some(fields.finish(lineno)?);
            continue;
        }
        let t_ms = value
            .get("t_ms")
            .and_then(Value::as_i64)
            .ok_or_else(|| SignalError::Parse {
                line: lineno,
                reason: "missing or non-integer 't_ms'".into(),
            })?;
        samples.push(Sample {
            t_ms,
            x: json_number(&value, "x", lineno)?,
            y: json_number(&value, "y", lineno)?,
            z: json_number(&value, "z", lineno)?,
        });
    }
    let (meta, rate) = meta.ok_or(SignalError::Parse {
        line: 1,
        reason: "empty input".into(),
    })?;
    SensorRecording::new(meta, rate, samples)
}

// ---------------------------------------------------------------------------
// Serialization

pub fn write_recording<W: Write>(
    out: &mut W,
    rec: &SensorRecording,
    format: Format,
) -> Result<(), SignalError> {
    let m = &rec.meta;
    match format {
        Format::Csv => {
            writeln!(
                out,
                "# subject={};session={};date={};device={};sensor={};rate_hz={}",
                m.subject_id,
                m.session_id,
                m.session_date.format("%Y-%m-%d"),
                m.device_id,
                m.sensor,
                rec.sample_rate_hz
            )?;
            writeln!(out, "t_ms,x,y,z")?;
            for s in &rec.samples {
                writeln!(out, "{},{},{},{}", s.t_ms, s.x, s.y, s.z)?;
            }
        }
        Format::Jsonl => {
            let header = serde_json::json!({
                "subject": m.subject_id,
                "session": m.session_id,
                "date": m.session_date.format("%Y-%m-%d").to_string(),
                "device": m.device_id,
                "sensor": m.sensor.as_str(),
                "rate_hz": rec.sample_rate_hz,
            });
            writeln!(out, "{header}")?;
            for s in &rec.samples {
                writeln!(out, "{}", serde_json::to_string(s).expect("finite sample"))?;
            }
        }
    }
    Ok(())
}
