//! Writes a small synthetic corpus to disk and reads it back.
//!
//!     cargo run --example synth_dataset -- /tmp/tremor-data

use std::path::PathBuf;

use tremor_id::pipeline::{load_sessions, write_sessions, SessionRecordings};
use tremor_id::signal_io::Format;
use tremor_id::synth::{gen_profile, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("tremor-synth"));
    let cfg = SynthConfig {
        subjects: 4,
        sessions: 2,
        duration_s: 10.0,
        ..SynthConfig::default()
    };
    for i in 0..cfg.subjects {
        let p = gen_profile(cfg.seed, i);
        println!(
            "{}: dominant tremor {:.1} Hz",
            p.subject_id,
            p.dominant_freq_hz()
        );
    }
    let sessions: Vec<SessionRecordings> = tremor_id::synth::gen_dataset(&cfg)?
        .into_iter()
        .map(Into::into)
        .collect();
    write_sessions(&out, &sessions, Format::Csv)?;
    let back = load_sessions(&out)?;
    assert_eq!(back, sessions);
    println!("{} sessions written to {}", back.len(), out.display());
    Ok(())
}
