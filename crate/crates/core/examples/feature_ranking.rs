//! Which features the forest splits on most, with and without per-subject
//! amplitude differences.
//!
//!     cargo run --release --example feature_ranking

use tremor_id::features::is_periodogram_feature;
use tremor_id::forest::{Dataset, Forest};
use tremor_id::pipeline::{extract_dataset, PipelineConfig, SessionRecordings};
use tremor_id::synth::gen_dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for vary_amplitudes in [true, false] {
        let mut cfg = PipelineConfig::default();
        cfg.synth.duration_s = 30.0;
        cfg.synth.profile.vary_amplitudes = vary_amplitudes;
        if !vary_amplitudes {
            cfg.synth.profile.session_gain_spread = 0.0;
        }
        let sessions: Vec<SessionRecordings> = gen_dataset(&cfg.synth)?
            .into_iter()
            .map(Into::into)
            .collect();
        let features = extract_dataset(&sessions, &cfg, true)?;
        let forest =
            Forest::train_parallel(&Dataset::from_feature_vectors(&features)?, &cfg.forest)?;
        println!("amplitudes vary per subject: {vary_amplitudes}");
        for (rank, (name, count)) in forest.feature_importance().iter().take(10).enumerate() {
            let mark = if is_periodogram_feature(name) {
                "  (periodogram)"
            } else {
                ""
            };
            println!("{:>3} {name:<26} {count}{mark}", rank + 1);
        }
    }
    Ok(())
}
