//! Generates a synthetic corpus, trains on early sessions and evaluates on
//! the latest ones.
//!
//!     cargo run --release --example identification_eval

use std::time::Instant;

use tremor_id::eval::{evaluate_verification, run_evaluation, split_by_session, verification_seed};
use tremor_id::pipeline::{extract_dataset, PipelineConfig, SessionRecordings};
use tremor_id::synth::gen_dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PipelineConfig::default();
    let t = Instant::now();
    let sessions: Vec<SessionRecordings> = gen_dataset(&cfg.synth)?
        .into_iter()
        .map(Into::into)
        .collect();
    println!(
        "{} sessions generated in {:.1?}",
        sessions.len(),
        t.elapsed()
    );

    let (forest, report) = run_evaluation(&sessions, &cfg, true)?;
    println!(
        "identification: accuracy {:.3}, FMR {:.4}, FNMR {:.3} over {} windows ({:.1?})",
        report.accuracy,
        report.false_match_rate,
        report.false_non_match_rate,
        report.n_test,
        t.elapsed()
    );

    let features = extract_dataset(&sessions, &cfg, true)?;
    let (_, test) = split_by_session(&features, cfg.test_fraction)?;
    let v = evaluate_verification(&forest, &test, verification_seed(&cfg))?;
    println!(
        "verification: accuracy {:.3} over {} claims",
        v.accuracy, v.n_claims
    );
    Ok(())
}
