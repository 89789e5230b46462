//! End-to-end processing: recordings → trimmed, filtered traces → windows →
//! feature vectors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_window, FeatureOptions, FeatureVector};
use crate::forest::ForestConfig;
use crate::signal_io::{
    format_for_path, read_recording, segment_windows, trim_edges, write_recording_file, Axis,
    Format, Sensor, SensorRecording,
};
use crate::synth::SynthConfig;
use crate::wflc::{filter_signal, FilterOutput, WflcParams};

/// Which WFLC output the features are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSource {
    /// Trimmed input without filtering.
    Raw,
    /// Tracked quasi-periodic component `wᵀx`.
    #[default]
    Tremor,
    /// What neither the harmonic model nor the bias explains.
    Residual,
}

impl FromStr for FeatureSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Self::Raw),
            "tremor" => Ok(Self::Tremor),
            "residual" => Ok(Self::Residual),
            other => Err(format!("unknown feature source '{other}'")),
        }
    }
}

impl fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Raw => "raw",
            Self::Tremor => "tremor",
            Self::Residual => "residual",
        })
    }
}

/// Every tunable of a run. Serialized as TOML; a persisted config fully
/// reproduces the run that wrote it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub trim_ms: u32,
    pub window_s: f64,
    pub overlap: f64,
    pub source: FeatureSource,
    pub test_fraction: f64,
    /// Seed for impostor-claim generation in verification.
    pub verification_seed: u64,
    pub wflc: WflcParams,
    pub features: FeatureOptions,
    pub forest: ForestConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            trim_ms: 100,
            window_s: 1.0,
            overlap: 0.0,
            source: FeatureSource::Tremor,
            test_fraction: 0.25,
            verification_seed: 0,
            wflc: WflcParams::default(),
            features: FeatureOptions::default(),
            forest: ForestConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return bad(format!("window_s must be positive, got {}", self.window_s));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return bad(format!("overlap must lie in [0, 1), got {}", self.overlap));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            ));
        }
        self.wflc.validate()?;
        self.forest.validate()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// One session's accelerometer and gyroscope recordings.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecordings {
    pub acc: SensorRecording,
    pub gyro: SensorRecording,
}

impl SessionRecordings {
    pub fn new(acc: SensorRecording, gyro: SensorRecording) -> Result<Self> {
        if acc.meta().sensor != Sensor::Accelerometer || gyro.meta().sensor != Sensor::Gyroscope {
            return Err(Error::Config(format!(
                "expected accelerometer + gyroscope recordings, got {} + {}",
                acc.meta().sensor,
                gyro.meta().sensor
            )));
        }
        if !acc.meta().same_session(gyro.meta()) {
            return Err(Error::Config(format!(
                "recordings belong to different sessions: {:?} vs {:?}",
                acc.meta(),
                gyro.meta()
            )));
        }
        Ok(Self { acc, gyro })
    }
}

impl From<(SensorRecording, SensorRecording)> for SessionRecordings {
    fn from((acc, gyro): (SensorRecording, SensorRecording)) -> Self {
        Self { acc, gyro }
    }
}

/// Runs the filter on each axis of a recording.
pub fn filter_axes(rec: &SensorRecording, params: &WflcParams) -> Result<[FilterOutput; 3]> {
    let run = |axis: Axis| {
        filter_signal(&rec.axis(axis), params).map_err(|e| {
            Error::from(e).context(format!(
                "{}/{} {} axis {}",
                rec.meta().subject_id,
                rec.meta().session_id,
                rec.meta().sensor,
                axis.as_str()
            ))
        })
    };
    Ok([run(Axis::X)?, run(Axis::Y)?, run(Axis::Z)?])
}

/// Trims a recording and swaps its axes for the selected trace.
pub fn prepare_recording(rec: &SensorRecording, cfg: &PipelineConfig) -> Result<SensorRecording> {
    let trimmed = trim_edges(rec, cfg.trim_ms)?;
    if cfg.source == FeatureSource::Raw {
        return Ok(trimmed);
    }
    let [x, y, z] = filter_axes(&trimmed, &cfg.wflc)?;
    let pick = |o: &FilterOutput| match cfg.source {
        FeatureSource::Tremor => o.tremor.clone(),
        _ => o.residual.clone(),
    };
    Ok(trimmed.with_axes(&pick(&x), &pick(&y), &pick(&z))?)
}

/// Feature vectors for every window of one session, in time order.
pub fn session_features(
    session: &SessionRecordings,
    cfg: &PipelineConfig,
) -> Result<Vec<FeatureVector>> {
    let acc = prepare_recording(&session.acc, cfg)?;
    let gyro = prepare_recording(&session.gyro, cfg)?;
    let acc_w = segment_windows(&acc, cfg.window_s, cfg.overlap)?;
    let gyro_w = segment_windows(&gyro, cfg.window_s, cfg.overlap)?;
    acc_w
        .iter()
        .zip(&gyro_w)
        .map(|(a, g)| Ok(extract_window(a, g, &cfg.features)?))
        .collect()
}

/// Extracts features for a list of sessions. With `parallel`, sessions are
/// processed on the rayon pool; output order is the input order either way.
pub fn extract_dataset(
    sessions: &[SessionRecordings],
    cfg: &PipelineConfig,
    parallel: bool,
) -> Result<Vec<FeatureVector>> {
    let run = |s: &SessionRecordings| {
        session_features(s, cfg).map_err(|e| {
            e.context(format!(
                "session {}/{}",
                s.acc.meta().subject_id,
                s.acc.meta().session_id
            ))
        })
    };
    let per_session: Vec<Vec<FeatureVector>> = if parallel {
        sessions.par_iter().map(run).collect::<Result<_>>()?
    } else {
        sessions.iter().map(run).collect::<Result<_>>()?
    };
    Ok(per_session.into_iter().flatten().collect())
}

/// Tremor traces (one per axis per sensor per session) after trimming.
pub fn tremor_traces(
    sessions: &[SessionRecordings],
    cfg: &PipelineConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for s in sessions {
        for rec in [&s.acc, &s.gyro] {
            let trimmed = trim_edges(rec, cfg.trim_ms)?;
            for o in filter_axes(&trimmed, &cfg.wflc)? {
                out.push(o.tremor);
            }
        }
    }
    Ok(out)
}

/// Groups recordings into accelerometer/gyroscope pairs by session, sorted
/// by subject, date, session and device.
pub fn pair_recordings(recs: Vec<SensorRecording>) -> Result<Vec<SessionRecordings>> {
    use std::collections::BTreeMap;
    type Key = (String, chrono::NaiveDate, String, String);
    let mut slots: BTreeMap<Key, (Option<SensorRecording>, Option<SensorRecording>)> =
        BTreeMap::new();
    for r in recs {
        let m = r.meta();
        let key = (
            m.subject_id.clone(),
            m.session_date,
            m.session_id.clone(),
            m.device_id.clone(),
        );
        let slot = slots.entry(key.clone()).or_default();
        let target = match m.sensor {
            Sensor::Accelerometer => &mut slot.0,
            Sensor::Gyroscope => &mut slot.1,
        };
        if target.is_some() {
            return Err(Error::Config(format!(
                "duplicate {} recording for {}/{}",
                m.sensor, key.0, key.2
            )));
        }
        *target = Some(r);
    }
    slots
        .into_iter()
        .map(|(key, slot)| match slot {
            (Some(acc), Some(gyro)) => SessionRecordings::new(acc, gyro),
            _ => Err(Error::Config(format!(
                "session {}/{} lacks an accelerometer or gyroscope recording",
                key.0, key.2
            ))),
        })
        .collect()
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if format_for_path(&p).is_some() {
            out.push(p);
        }
    }
    Ok(())
}

/// Reads every `.csv`/`.jsonl` recording under `dir` (recursively) and pairs
/// them by session.
pub fn load_sessions(dir: &Path) -> Result<Vec<SessionRecordings>> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no recordings found under {}",
            dir.display()
        )));
    }
    let recs = files
        .iter()
        .map(|p| read_recording(p).map_err(|e| Error::from(e).context(p.display().to_string())))
        .collect::<Result<Vec<_>>>()?;
    pair_recordings(recs)
}

/// File name used for a recording inside a dataset directory.
pub fn recording_file_name(rec: &SensorRecording, format: Format) -> String {
    let m = rec.meta();
    let ext = match format {
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    };
    format!(
        "{}_{}_{}.{ext}",
        m.subject_id,
        m.session_id,
        m.sensor.short()
    )
}

pub fn write_sessions(dir: &Path, sessions: &[SessionRecordings], format: Format) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for s in sessions {
        for rec in [&s.acc, &s.gyro] {
            write_recording_file(&dir.join(recording_file_name(rec, format)), rec, format)?;
        }
    }
    Ok(())
}
