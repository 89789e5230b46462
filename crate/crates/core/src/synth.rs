//! Synthetic multi-subject tremor recordings.
//!
//! Each subject gets a dominant tremor frequency on a fixed grid inside a
//! configurable band, a secondary component, per-axis amplitude mixes and a
//! frequency-jitter level. A recording adds slow voluntary drift (< 2 Hz)
//! and white noise on top. Subjects differ only in these synthetic degrees
//! of freedom; nothing here claims physiological realism beyond band
//! placement.

use std::f64::consts::PI;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;
use crate::signal_io::{RecordingMeta, Sample, Sensor, SensorRecording, SignalError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneComponent {
    pub freq_hz: f64,
    pub amplitude: f64,
    /// Phase offset, radians.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorProfile {
    /// Tremor components for the X, Y and Z axes.
    pub axes: [Vec<ToneComponent>; 3],
    pub noise_std: f64,
    pub drift_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: String,
    pub accelerometer: SensorProfile,
    pub gyroscope: SensorProfile,
    /// Standard deviation of the instantaneous-frequency wander, Hz.
    pub jitter_std_hz: f64,
    /// Upper frequency of the voluntary drift, Hz.
    pub drift_bandwidth_hz: f64,
    /// Relative spread of the per-session amplitude gain.
    pub session_gain_spread: f64,
}

impl SubjectProfile {
    /// Frequency of the strongest component on the accelerometer X axis.
    pub fn dominant_freq_hz(&self) -> f64 {
        self.accelerometer.axes[0]
            .iter()
            .max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
            .map(|c| c.freq_hz)
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileOptions {
    /// Band holding the dominant (and secondary) tremor frequencies, Hz.
    pub band_hz: (f64, f64),
    /// Grid spacing of dominant frequencies between consecutive subjects.
    pub spacing_hz: f64,
    /// Draw per-axis amplitude mixes per subject; otherwise every subject
    /// shares the same mix and differs only in frequency content.
    pub vary_amplitudes: bool,
    /// Secondary component amplitude relative to the dominant one (0 disables).
    pub secondary_ratio: f64,
    pub jitter_std_hz: f64,
    pub acc_amplitude: f64,
    pub gyro_amplitude: f64,
    pub acc_noise_std: f64,
    pub gyro_noise_std: f64,
    pub acc_drift: f64,
    pub gyro_drift: f64,
    pub drift_bandwidth_hz: f64,
    pub session_gain_spread: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            band_hz: (4.0, 12.0),
            spacing_hz: 0.5,
            vary_amplitudes: true,
            secondary_ratio: 0.35,
            jitter_std_hz: 0.1,
            acc_amplitude: 0.08,
            gyro_amplitude: 0.03,
            acc_noise_std: 0.01,
            gyro_noise_std: 0.004,
            acc_drift: 0.05,
            gyro_drift: 0.02,
            drift_bandwidth_hz: 1.5,
            session_gain_spread: 0.1,
        }
    }
}

impl ProfileOptions {
    /// Noise, jitter and drift all switched off, one component per axis.
    pub fn clean() -> Self {
        Self {
            secondary_ratio: 0.0,
            jitter_std_hz: 0.0,
            acc_noise_std: 0.0,
            gyro_noise_std: 0.0,
            acc_drift: 0.0,
            gyro_drift: 0.0,
            session_gain_spread: 0.0,
            ..Self::default()
        }
    }

    fn slots(&self) -> usize {
        let (lo, hi) = self.band_hz;
        ((hi - lo) / self.spacing_hz + 1e-9).floor() as usize + 1
    }
}

pub fn subject_id(index: usize) -> String {
    format!("subject{:02}", index + 1)
}

/// Profile with default options.
pub fn gen_profile(seed: u64, subject_index: usize) -> SubjectProfile {
    gen_profile_with(seed, subject_index, &ProfileOptions::default())
}

/// Deterministic profile for `(seed, subject_index)`. Dominant frequencies
/// sit on a `spacing_hz` grid starting at the lower band edge, so subjects
/// with different indices (modulo the number of grid slots) are at least
/// one spacing apart.
pub fn gen_profile_with(seed: u64, subject_index: usize, opts: &ProfileOptions) -> SubjectProfile {
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x5052_4f46, subject_index as u64]));
    let (lo, hi) = opts.band_hz;
    let dominant = lo + opts.spacing_hz * (subject_index % opts.slots()) as f64;
    let secondary = lo + rng.random::<f64>() * (hi - lo);

    let sensor = |base_amp: f64, noise: f64, drift: f64, rng: &mut ChaCha8Rng| {
        let axes = std::array::from_fn(|axis| {
            let gain = if opts.vary_amplitudes {
                0.3 + 0.7 * rng.random::<f64>()
            } else {
                [1.0, 0.8, 0.6][axis]
            };
            let amp = base_amp * gain;
            let mut comps = vec![ToneComponent {
                freq_hz: dominant,
                amplitude: amp,
                phase: rng.random::<f64>() * 2.0 * PI,
            }];
            if opts.secondary_ratio > 0.0 {
                comps.push(ToneComponent {
                    freq_hz: secondary,
                    amplitude: amp * opts.secondary_ratio,
                    phase: rng.random::<f64>() * 2.0 * PI,
                });
            }
            comps
        });
        SensorProfile {
            axes,
            noise_std: noise,
            drift_amplitude: drift,
        }
    };
    let accelerometer = sensor(
        opts.acc_amplitude,
        opts.acc_noise_std,
        opts.acc_drift,
        &mut rng,
    );
    let gyroscope = sensor(
        opts.gyro_amplitude,
        opts.gyro_noise_std,
        opts.gyro_drift,
        &mut rng,
    );
    let jitter = if opts.jitter_std_hz > 0.0 {
        opts.jitter_std_hz * (0.5 + rng.random::<f64>())
    } else {
        0.0
    };

    SubjectProfile {
        subject_id: subject_id(subject_index),
        accelerometer,
        gyroscope,
        jitter_std_hz: jitter,
        drift_bandwidth_hz: opts.drift_bandwidth_hz,
        session_gain_spread: opts.session_gain_spread,
    }
}

/// Identifies one synthetic session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSpec {
    pub session_id: String,
    pub date: NaiveDate,
    pub device_id: String,
}

/// Generates the accelerometer and gyroscope recordings of one session.
pub fn gen_recording(
    profile: &SubjectProfile,
    session: &SessionSpec,
    duration_s: f64,
    rate_hz: f64,
    seed: u64,
) -> Result<(SensorRecording, SensorRecording), SignalError> {
    if !(rate_hz > 0.0 && rate_hz <= 1000.0) {
        return Err(SignalError::InvalidArgument(format!(
            "rate must lie in (0, 1000] Hz for millisecond timestamps, got {rate_hz}"
        )));
    }
    let n = (duration_s * rate_hz).round() as usize;
    if n < 2 {
        return Err(SignalError::InvalidArgument(format!(
            "{duration_s} s at {rate_hz} Hz gives fewer than 2 samples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1.0 / rate_hz;

    // Shared frequency wander: AR(1) with ~0.5 s correlation time.
    let mut jitter = vec![0.0; n];
    if profile.jitter_std_hz > 0.0 {
        let rho = (-dt / 0.5f64).exp();
        let innov =
            Normal::new(0.0, profile.jitter_std_hz * (1.0 - rho * rho).sqrt()).expect("finite std");
        let mut d = Normal::new(0.0, profile.jitter_std_hz)
            .expect("finite std")
            .sample(&mut rng);
        for j in jitter.iter_mut() {
            *j = d;
            d = rho * d + innov.sample(&mut rng);
        }
    }
    let session_phase = rng.random::<f64>() * 2.0 * PI;
    let gain = 1.0 + profile.session_gain_spread * (2.0 * rng.random::<f64>() - 1.0);

    let timestamps: Vec<i64> = (0..n)
        .map(|i| (i as f64 * 1000.0 / rate_hz).round() as i64)
        .collect();

    let make = |sp: &SensorProfile, sensor: Sensor, rng: &mut ChaCha8Rng| {
        let mut axes: [Vec<f64>; 3] = Default::default();
        for (axis, comps) in sp.axes.iter().enumerate() {
            let mut sig = vec![0.0; n];
            for c in comps {
                let mut phase = c.phase + session_phase;
                for (k, v) in sig.iter_mut().enumerate() {
                    *v += gain * c.amplitude * phase.sin();
                    phase += 2.0 * PI * (c.freq_hz + jitter[k]) * dt;
                }
            }
            if sp.drift_amplitude > 0.0 {
                let per = sp.drift_amplitude / 3f64.sqrt();
                for _ in 0..3 {
                    let f = 0.05 + rng.random::<f64>() * (profile.drift_bandwidth_hz - 0.05);
                    let p0 = rng.random::<f64>() * 2.0 * PI;
                    for (k, v) in sig.iter_mut().enumerate() {
                        *v += per * (2.0 * PI * f * k as f64 * dt + p0).sin();
                    }
                }
            }
            if sp.noise_std > 0.0 {
                let noise = Normal::new(0.0, sp.noise_std).expect("finite std");
                for v in sig.iter_mut() {
                    *v += noise.sample(rng);
                }
            }
            axes[axis] = sig;
        }
        let samples = (0..n)
            .map(|k| Sample {
                t_ms: timestamps[k],
                x: axes[0][k],
                y: axes[1][k],
                z: axes[2][k],
            })
            .collect();
        SensorRecording::new(
            RecordingMeta {
                subject_id: profile.subject_id.clone(),
                session_id: session.session_id.clone(),
                session_date: session.date,
                device_id: session.device_id.clone(),
                sensor,
            },
            rate_hz,
            samples,
        )
    };
    let acc = make(&profile.accelerometer, Sensor::Accelerometer, &mut rng)?;
    let gyro = make(&profile.gyroscope, Sensor::Gyroscope, &mut rng)?;
    Ok((acc, gyro))
}

/// Shape of a whole synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub subjects: usize,
    pub sessions: usize,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub seed: u64,
    pub device_id: String,
    pub profile: ProfileOptions,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects: 10,
            sessions: 4,
            duration_s: 60.0,
            rate_hz: 100.0,
            seed: 7,
            device_id: "synthetic".into(),
            profile: ProfileOptions::default(),
        }
    }
}

/// First session date; later sessions follow at one-week intervals.
pub fn session_date(session_index: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date")
        + Duration::days(7 * session_index as i64)
}

/// One (accelerometer, gyroscope) pair per subject and session, ordered by
/// subject then session.
pub fn gen_dataset(
    cfg: &SynthConfig,
) -> Result<Vec<(SensorRecording, SensorRecording)>, SignalError> {
    let mut out = Vec::with_capacity(cfg.subjects * cfg.sessions);
    for s in 0..cfg.subjects {
        let profile = gen_profile_with(cfg.seed, s, &cfg.profile);
        for k in 0..cfg.sessions {
            let spec = SessionSpec {
                session_id: format!("s{}", k + 1),
                date: session_date(k),
                device_id: cfg.device_id.clone(),
            };
            let seed = derive_seed(cfg.seed, &[0x5345_5353, s as u64, k as u64]);
            out.push(gen_recording(
                &profile,
                &spec,
                cfg.duration_s,
                cfg.rate_hz,
                seed,
            )?);
        }
    }
    Ok(out)
}
