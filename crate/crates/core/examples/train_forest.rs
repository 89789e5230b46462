//! Trains a forest on synthetic windows, saves it, reloads it and predicts.
//!
//!     cargo run --release --example train_forest

use tremor_id::eval::split_by_session;
use tremor_id::forest::{Dataset, Forest, ForestConfig};
use tremor_id::pipeline::{extract_dataset, PipelineConfig, SessionRecordings};
use tremor_id::synth::{gen_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PipelineConfig {
        synth: SynthConfig {
            subjects: 5,
            sessions: 3,
            duration_s: 20.0,
            ..SynthConfig::default()
        },
        forest: ForestConfig {
            n_trees: 50,
            rng_seed: 3,
            ..ForestConfig::default()
        },
        ..PipelineConfig::default()
    };
    let sessions: Vec<SessionRecordings> = gen_dataset(&cfg.synth)?
        .into_iter()
        .map(Into::into)
        .collect();
    let features = extract_dataset(&sessions, &cfg, true)?;
    let (train, test) = split_by_session(&features, cfg.test_fraction)?;

    let forest = Forest::train_parallel(&Dataset::from_feature_vectors(&train)?, &cfg.forest)?;
    let path = std::env::temp_dir().join("tremor-forest.json");
    forest.save(&path)?;
    let forest = Forest::load(&path)?;
    println!(
        "{} trees, labels {:?}, saved to {}",
        forest.trees().len(),
        forest.labels(),
        path.display()
    );

    for fv in test.iter().step_by(test.len() / 5) {
        let p = forest.predict_vector(fv)?;
        println!(
            "{} {} -> {} {:?}",
            fv.subject(),
            fv.meta.session_id,
            p.label,
            p.votes
        );
    }
    Ok(())
}
