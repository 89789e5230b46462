//! Per-window feature extraction.
//!
//! Every window pair (accelerometer + gyroscope) yields 176 values laid out as
//! `sensor × signal × feature`:
//!
//! * sensors: `acc`, `gyro`
//! * signals: `x`, `y`, `z`, `mag`
//! * 22 features: 5 time-domain, 7 magnitude-spectrum, 10 periodogram
//!
//! Feature `f` of signal `s` of sensor `k` lives at index
//! `k * 88 + s * 22 + f`; the canonical names are `{sensor}_{signal}_{feature}`
//! (for example `gyro_mag_psd_irreg_j`) and are returned by [`feature_names`].

mod spectral;
mod time;

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal_io::{Sensor, Window};

pub use spectral::{
    dft_spectrum, periodogram, psd_features, psd_features_literal, spectral_features,
    two_sided_power, Periodogram, PsdFeatures, ShapeFeatures, Spectrum,
};
pub use time::{time_features, TimeFeatures};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("need at least {needed} samples, got {got}")]
    Length { needed: usize, got: usize },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("window metadata mismatch: {0}")]
    MetadataMismatch(String),
    #[error("{signal}: {source}")]
    Signal {
        signal: String,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("feature file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FeatureError {
    fn from(e: std::io::Error) -> Self {
        FeatureError::Io(e.to_string())
    }
}

pub const FEATURES_PER_SIGNAL: usize = 22;
pub const SIGNALS_PER_SENSOR: usize = 4;
pub const FEATURE_COUNT: usize = 2 * SIGNALS_PER_SENSOR * FEATURES_PER_SIGNAL;

pub const SIGNAL_NAMES: [&str; SIGNALS_PER_SENSOR] = ["x", "y", "z", "mag"];

pub const PER_SIGNAL_NAMES: [&str; FEATURES_PER_SIGNAL] = [
    "mean",
    "std",
    "avg_dev",
    "rms",
    "max",
    "spec_std",
    "spec_centroid",
    "spec_skewness",
    "spec_kurtosis",
    "spec_crest",
    "spec_irreg_k",
    "spec_irreg_j",
    "psd_std",
    "psd_centroid",
    "psd_skewness",
    "psd_kurtosis",
    "psd_crest",
    "psd_irreg_k",
    "psd_irreg_j",
    "psd_top1",
    "psd_top2",
    "psd_top3",
];

/// The 176 canonical feature names in vector order.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(FEATURE_COUNT);
        for sensor in [Sensor::Accelerometer, Sensor::Gyroscope] {
            for signal in SIGNAL_NAMES {
                for feat in PER_SIGNAL_NAMES {
                    names.push(format!("{}_{signal}_{feat}", sensor.short()));
                }
            }
        }
        names
    })
}

pub fn feature_index(name: &str) -> Option<usize> {
    feature_names().iter().position(|n| n == name)
}

/// True for names of periodogram-derived features.
pub fn is_periodogram_feature(name: &str) -> bool {
    name.contains("_psd_")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureOptions {
    /// Drop the 0 Hz bin before computing spectral and periodogram features.
    #[serde(default)]
    pub exclude_dc: bool,
    /// Centre periodogram kurtosis and crest on the magnitude-spectrum
    /// centroid instead of the periodogram centroid.
    #[serde(default)]
    pub literal_psd_centroid: bool,
    /// Band splits as fractions of the one-sided periodogram length.
    #[serde(default = "default_band_fractions")]
    pub band_fractions: (f64, f64),
}

fn default_band_fractions() -> (f64, f64) {
    (1.0 / 3.0, 2.0 / 3.0)
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            exclude_dc: false,
            literal_psd_centroid: false,
            band_fractions: default_band_fractions(),
        }
    }
}

/// Window provenance carried alongside the feature values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowMeta {
    pub subject_id: String,
    pub session_id: String,
    pub session_date: NaiveDate,
    pub device_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub meta: WindowMeta,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn subject(&self) -> &str {
        &self.meta.subject_id
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }
}

/// The 22 features of one signal, in canonical order.
pub fn signal_features(
    x: &[f64],
    sample_rate_hz: f64,
    opts: &FeatureOptions,
) -> Result<[f64; FEATURES_PER_SIGNAL], FeatureError> {
    let t = time_features(x)?;
    let mut spec = dft_spectrum(x, sample_rate_hz)?;
    let mut pgram = periodogram(x, sample_rate_hz)?;
    if opts.exclude_dc {
        spec = spec.without_dc();
        pgram = pgram.without_dc()?;
    }
    let (f1, f2) = opts.band_fractions;
    let nb = pgram.len() as f64;
    let splits = ((f1 * nb).floor() as usize, (f2 * nb).floor() as usize);
    if splits != pgram.band_splits {
        pgram = Periodogram::with_splits(pgram.power, pgram.freqs, splits)?;
    }
    let s = spectral_features(&spec);
    let p = if opts.literal_psd_centroid {
        psd_features_literal(&pgram, s.centroid)
    } else {
        psd_features(&pgram)
    };

    let mut out = [0.0; FEATURES_PER_SIGNAL];
    out[..5].copy_from_slice(&t.to_array());
    out[5..12].copy_from_slice(&s.to_array());
    out[12..].copy_from_slice(&p.to_array());
    Ok(out)
}

fn check_pair(acc: &Window, gyro: &Window) -> Result<(), FeatureError> {
    let mismatch = |m: String| Err(FeatureError::MetadataMismatch(m));
    if acc.meta.sensor != Sensor::Accelerometer || gyro.meta.sensor != Sensor::Gyroscope {
        return mismatch(format!(
            "expected accelerometer + gyroscope, got {} + {}",
            acc.meta.sensor, gyro.meta.sensor
        ));
    }
    if !acc.meta.same_session(&gyro.meta) {
        return mismatch(format!(
            "windows come from different sessions ({}/{} vs {}/{})",
            acc.meta.subject_id, acc.meta.session_id, gyro.meta.subject_id, gyro.meta.session_id
        ));
    }
    if acc.len() != gyro.len() {
        return mismatch(format!(
            "window lengths differ: {} vs {}",
            acc.len(),
            gyro.len()
        ));
    }
    if acc.sample_rate_hz != gyro.sample_rate_hz {
        return mismatch(format!(
            "sample rates differ: {} vs {}",
            acc.sample_rate_hz, gyro.sample_rate_hz
        ));
    }
    Ok(())
}

/// Extracts the 176-value vector from an accelerometer/gyroscope window pair.
///
/// The windows already hold whichever trace (raw, tremor, residual) the
/// caller chose to analyse.
pub fn extract_window(
    acc: &Window,
    gyro: &Window,
    opts: &FeatureOptions,
) -> Result<FeatureVector, FeatureError> {
    check_pair(acc, gyro)?;
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    for w in [acc, gyro] {
        for (series, name) in w.series().into_iter().zip(SIGNAL_NAMES) {
            let f = signal_features(series, w.sample_rate_hz, opts).map_err(|e| {
                FeatureError::Signal {
                    signal: format!("{}_{name}", w.meta.sensor.short()),
                    source: Box::new(e),
                }
            })?;
            values.extend_from_slice(&f);
        }
    }
    debug_assert_eq!(values.len(), FEATURE_COUNT);
    let m = &acc.meta;
    Ok(FeatureVector {
        meta: WindowMeta {
            subject_id: m.subject_id.clone(),
            session_id: m.session_id.clone(),
            session_date: m.session_date,
            device_id: m.device_id.clone(),
        },
        values,
    })
}

// ---------------------------------------------------------------------------
// Feature CSV

const META_COLUMNS: [&str; 4] = ["subject", "session", "date", "device"];

pub fn write_feature_csv<W: Write>(
    out: &mut W,
    rows: &[FeatureVector],
) -> Result<(), FeatureError> {
    let mut header: Vec<&str> = META_COLUMNS.to_vec();
    header.extend(feature_names().iter().map(String::as_str));
    writeln!(out, "{}", header.join(","))?;
    for fv in rows {
        if fv.values.len() != FEATURE_COUNT {
            return Err(FeatureError::Length {
                needed: FEATURE_COUNT,
                got: fv.values.len(),
            });
        }
        let m = &fv.meta;
        write!(
            out,
            "{},{},{},{}",
            m.subject_id,
            m.session_id,
            m.session_date.format("%Y-%m-%d"),
            m.device_id
        )?;
        for v in &fv.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_feature_csv<R: BufRead>(input: R) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut lines = input.lines();
    let header = lines.next().ok_or(FeatureError::Format {
        line: 1,
        reason: "empty file".into(),
    })??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let expected: Vec<&str> = META_COLUMNS
        .iter()
        .copied()
        .chain(feature_names().iter().map(String::as_str))
        .collect();
    if cols != expected {
        return Err(FeatureError::Format {
            line: 1,
            reason: "header does not match the canonical feature layout".into(),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != expected.len() {
            return Err(FeatureError::Format {
                line: lineno,
                reason: format!("expected {} columns, got {}", expected.len(), fields.len()),
            });
        }
        let session_date =
            NaiveDate::parse_from_str(fields[2], "%Y-%m-%d").map_err(|e| FeatureError::Format {
                line: lineno,
                reason: format!("bad date '{}': {e}", fields[2]),
            })?;
        let values = fields[4..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| FeatureError::Format {
                        line: lineno,
                        reason: format!("bad value '{f}'"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(FeatureVector {
            meta: WindowMeta {
                subject_id: fields[0].to_string(),
                session_id: fields[1].to_string(),
                session_date,
                device_id: fields[3].to_string(),
            },
            values,
        });
    }
    Ok(rows)
}
