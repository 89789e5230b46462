//! Mean accuracy for several window lengths and for growing forests.
//!
//!     cargo run --release --example window_sweep

use tremor_id::eval::{sweep, SweepParam};
use tremor_id::pipeline::{PipelineConfig, SessionRecordings};
use tremor_id::synth::gen_dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = PipelineConfig::default();
    cfg.synth.duration_s = 30.0;
    cfg.forest.n_trees = 40;
    let sessions: Vec<SessionRecordings> = gen_dataset(&cfg.synth)?
        .into_iter()
        .map(Into::into)
        .collect();

    let table = sweep(
        &sessions,
        SweepParam::WindowS,
        &[0.5, 1.0, 2.0, 3.0],
        &cfg,
        2,
        true,
    )?;
    table.write_csv(&mut std::io::stdout())?;

    let table = sweep(
        &sessions,
        SweepParam::NTrees,
        &[1.0, 5.0, 20.0, 80.0],
        &cfg,
        3,
        true,
    )?;
    table.write_csv(&mut std::io::stdout())?;
    Ok(())
}
