//! Extracts the 176-value feature vector from one window of a synthetic
//! session and prints a few named features.
//!
//!     cargo run --example feature_extraction

use tremor_id::features::{extract_window, feature_names, FeatureOptions};
use tremor_id::pipeline::{prepare_recording, PipelineConfig};
use tremor_id::signal_io::segment_windows;
use tremor_id::synth::{gen_profile, gen_recording, session_date, SessionSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = gen_profile(7, 2);
    let spec = SessionSpec {
        session_id: "s1".into(),
        date: session_date(0),
        device_id: "synthetic".into(),
    };
    let (acc, gyro) = gen_recording(&profile, &spec, 5.0, 100.0, 1)?;

    let cfg = PipelineConfig::default();
    let acc = prepare_recording(&acc, &cfg)?;
    let gyro = prepare_recording(&gyro, &cfg)?;
    let a = segment_windows(&acc, cfg.window_s, cfg.overlap)?;
    let g = segment_windows(&gyro, cfg.window_s, cfg.overlap)?;
    let fv = extract_window(&a[1], &g[1], &FeatureOptions::default())?;

    println!(
        "{} features; dominant tremor {:.1} Hz",
        fv.values.len(),
        profile.dominant_freq_hz()
    );
    for name in [
        "acc_x_rms",
        "acc_x_psd_top1",
        "acc_x_psd_centroid",
        "gyro_mag_spec_irreg_j",
    ] {
        println!("{name:>24} = {:.6}", fv.get(name).unwrap());
    }
    assert_eq!(feature_names().len(), fv.values.len());
    Ok(())
}
