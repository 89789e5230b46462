//! Command-line front end. Every subcommand loads a [`PipelineConfig`]
//! (from `--config`, else from `$TREMOR_ID_CONFIG`, else defaults), applies
//! flag overrides, and writes the effective config beside its outputs.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{
    band_energy, evaluate_identification, evaluate_verification, split_by_session, sweep,
    verification_seed, SweepParam,
};
use crate::features::{read_feature_csv, write_feature_csv, FeatureVector};
use crate::forest::{Dataset, Forest};
use crate::pipeline::{
    extract_dataset, filter_axes, load_sessions, session_features, tremor_traces, write_sessions,
    FeatureSource, PipelineConfig, SessionRecordings,
};
use crate::signal_io::{read_recording, trim_edges, Axis, Format};
use crate::synth::gen_dataset;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "TREMOR_ID_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "tremor-id",
    version,
    about = "Identify people from the physiological tremor in smartphone motion data"
)]
struct Cli {
    /// Pipeline config (TOML). Defaults to $TREMOR_ID_CONFIG when set.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads; 1 runs single-threaded, 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic recording corpus.
    Synth(SynthArgs),
    /// Run the WFLC filter on one axis of a recording.
    Filter(FilterArgs),
    /// Extract feature vectors from a directory of recordings.
    Extract(ExtractArgs),
    /// Train a random forest.
    Train(TrainArgs),
    /// Evaluate identification on held-out sessions.
    Evaluate(EvaluateArgs),
    /// Predict who recorded a session.
    Identify(IdentifyArgs),
    /// Accept or reject identity claims.
    Verify(VerifyArgs),
    /// Mean accuracy across values of one parameter.
    Sweep(SweepArgs),
    /// Rank features by how often the forest splits on them.
    RankFeatures(RankArgs),
    /// Fraction of tremor energy in frequency bands.
    BandEnergy(BandArgs),
}

/// Flags overriding config fields one-to-one.
#[derive(Debug, Args, Default)]
struct Overrides {
    /// Samples dropped at each end of a recording, in ms.
    #[arg(long)]
    trim_ms: Option<u32>,
    /// Window length in seconds.
    #[arg(long)]
    window_s: Option<f64>,
    /// Window overlap fraction in [0, 1).
    #[arg(long)]
    overlap: Option<f64>,
    /// Trace the features are computed on: raw, tremor or residual.
    #[arg(long)]
    source: Option<FeatureSource>,
    /// Fraction of each subject's windows held out for testing.
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Number of harmonics in the filter.
    #[arg(long)]
    wflc_order: Option<usize>,
    /// Filter frequency adaptation gain.
    #[arg(long)]
    frequency_gain: Option<f64>,
    /// Filter amplitude adaptation gain.
    #[arg(long)]
    amplitude_gain: Option<f64>,
    /// Filter bias adaptation gain.
    #[arg(long)]
    bias_gain: Option<f64>,
    /// Initial filter frequency in rad/sample.
    #[arg(long)]
    omega0_init: Option<f64>,
    /// Trees in the forest.
    #[arg(long)]
    n_trees: Option<usize>,
    /// Fraction of features considered at each split.
    #[arg(long)]
    attr_fraction: Option<f64>,
    /// Minimum samples per leaf.
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Seed for bootstrap and attribute sampling.
    #[arg(long)]
    seed: Option<u64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = v; })*
            };
        }
        set!(
            trim_ms => trim_ms,
            window_s => window_s,
            overlap => overlap,
            source => source,
            test_fraction => test_fraction,
            wflc_order => wflc.order,
            frequency_gain => wflc.frequency_gain,
            amplitude_gain => wflc.amplitude_gain,
            bias_gain => wflc.bias_gain,
            omega0_init => wflc.omega0_init,
            n_trees => forest.n_trees,
            attr_fraction => forest.attr_fraction,
            min_leaf => forest.min_leaf,
            seed => forest.rng_seed,
        );
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    subjects: Option<usize>,
    #[arg(long)]
    sessions: Option<usize>,
    /// Seconds per session.
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    rate_hz: Option<f64>,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Recording file (.csv or .jsonl).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "x")]
    axis: Axis,
    /// Output CSV with input, tremor, voluntary, residual and ω₀ per step.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Directory of recordings.
    #[arg(long)]
    data: PathBuf,
    /// Output feature CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false)]
struct InputArgs {
    /// Directory of recordings (features are extracted on the fly).
    #[arg(long, group = "input")]
    data: Option<PathBuf>,
    /// Feature CSV written by `extract`.
    #[arg(long, group = "input")]
    features: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Train on every window instead of the training sessions only.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    model: PathBuf,
    /// Report file (JSON); flat CSVs are written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Evaluate every window instead of the held-out sessions only.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Accelerometer recording.
    #[arg(long)]
    acc: PathBuf,
    /// Gyroscope recording of the same session.
    #[arg(long)]
    gyro: PathBuf,
    /// Also write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Directory of recordings to build genuine and impostor claims from.
    #[arg(long, conflicts_with_all = ["acc", "gyro", "claim"])]
    data: Option<PathBuf>,
    /// Feature CSV to build genuine and impostor claims from.
    #[arg(long, conflicts_with_all = ["data", "acc", "gyro", "claim"])]
    features: Option<PathBuf>,
    /// Use every window instead of the held-out sessions only.
    #[arg(long)]
    all: bool,
    /// Accelerometer recording for a single claim.
    #[arg(long, requires_all = ["gyro", "claim"])]
    acc: Option<PathBuf>,
    #[arg(long, requires_all = ["acc", "claim"])]
    gyro: Option<PathBuf>,
    /// Claimed subject id.
    #[arg(long, requires_all = ["acc", "gyro"])]
    claim: Option<String>,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    /// window_s, n_trees or overlap.
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Output CSV; the JSON table is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    model: PathBuf,
    /// Rows to print.
    #[arg(long, default_value_t = 20)]
    top: usize,
    /// Write the full ranking as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BandArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated LO-HI bands in Hz.
    #[arg(long, value_delimiter = ',', value_parser = parse_band, default_value = "4-7,7-10,6-10")]
    bands: Vec<(f64, f64)>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once('-')
        .ok_or_else(|| format!("expected LO-HI, got '{s}'"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok((num(lo)?, num(hi)?))
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit status: 0 on success, 2 on usage errors, 1 on
/// pipeline errors. Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn run_command_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// [`run_command_with`] on the process's standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run_command_with(argv, &mut out, &mut err)
}

fn base_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => PipelineConfig::load(Path::new(&p)),
            _ => Ok(PipelineConfig::default()),
        },
    }
}

fn config_with(base: &PipelineConfig, overrides: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = base.clone();
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Path of the config echo for an output file: `report.json` →
/// `report.config.toml`.
pub fn config_echo_path(out: &Path) -> PathBuf {
    out.with_extension("config.toml")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn echo_beside(out: &Path, cfg: &PipelineConfig) -> Result<()> {
    write_text(&config_echo_path(out), &cfg.to_toml())
}

fn echo(out: Option<&Path>, cfg: &PipelineConfig, stderr: &mut Vec<u8>) -> Result<()> {
    match out {
        Some(p) => echo_beside(p, cfg),
        None => {
            writeln!(stderr, "# effective config")?;
            stderr.write_all(cfg.to_toml().as_bytes())?;
            Ok(())
        }
    }
}

/// Config for commands that use an existing model: the forest section is
/// whatever the model was trained with.
fn config_for_model(
    base: &PipelineConfig,
    overrides: &Overrides,
    model: &Forest,
) -> Result<PipelineConfig> {
    let mut cfg = config_with(base, overrides)?;
    cfg.forest = model.config().clone();
    Ok(cfg)
}

fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_feature_csv(BufReader::new(f))
        .map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn load_features(
    input: &InputArgs,
    cfg: &PipelineConfig,
    parallel: bool,
) -> Result<Vec<FeatureVector>> {
    match (&input.data, &input.features) {
        (Some(dir), _) => extract_dataset(&load_sessions(dir)?, cfg, parallel),
        (None, Some(csv)) => read_features(csv),
        (None, None) => unreachable!("clap requires one input"),
    }
}

fn load_session(acc: &Path, gyro: &Path) -> Result<SessionRecordings> {
    let read =
        |p: &Path| read_recording(p).map_err(|e| Error::from(e).context(p.display().to_string()));
    SessionRecordings::new(read(acc)?, read(gyro)?)
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let base = base_config(cli.config.as_deref())?;
    let parallel = cli.jobs != 1;
    // Output is buffered so the worker pool never touches the caller's streams.
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = if parallel {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| dispatch(cli.command, &base, true, &mut out, &mut err))
    } else {
        dispatch(cli.command, &base, false, &mut out, &mut err)
    };
    stdout.write_all(&out)?;
    stderr.write_all(&err)?;
    result
}

#[derive(Serialize)]
struct Identification<'a> {
    predicted: &'a str,
    windows: usize,
    votes: Vec<(&'a str, usize)>,
}

fn dispatch(
    command: Command,
    base: &PipelineConfig,
    parallel: bool,
    stdout: &mut Vec<u8>,
    stderr: &mut Vec<u8>,
) -> Result<()> {
    match command {
        Command::Synth(a) => {
            let mut cfg = base.clone();
            let s = &mut cfg.synth;
            if let Some(v) = a.subjects {
                s.subjects = v;
            }
            if let Some(v) = a.sessions {
                s.sessions = v;
            }
            if let Some(v) = a.duration_s {
                s.duration_s = v;
            }
            if let Some(v) = a.rate_hz {
                s.rate_hz = v;
            }
            if let Some(v) = a.seed {
                s.seed = v;
            }
            let sessions: Vec<SessionRecordings> = gen_dataset(&cfg.synth)?
                .into_iter()
                .map(Into::into)
                .collect();
            write_sessions(&a.out, &sessions, a.format)?;
            cfg.save(&a.out.join("effective_config.toml"))?;
            writeln!(
                stdout,
                "wrote {} sessions to {}",
                sessions.len(),
                a.out.display()
            )?;
        }
        Command::Filter(a) => {
            let cfg = config_with(base, &a.overrides)?;
            let rec = read_recording(&a.input)?;
            let trimmed = trim_edges(&rec, cfg.trim_ms)?;
            let [x, y, z] = filter_axes(&trimmed, &cfg.wflc)?;
            let out = match a.axis {
                Axis::X => x,
                Axis::Y => y,
                Axis::Z => z,
            };
            let mut f = create(&a.out)?;
            out.write_csv(&mut f)?;
            f.flush()?;
            echo_beside(&a.out, &cfg)?;
        }
        Command::Extract(a) => {
            let cfg = config_with(base, &a.overrides)?;
            let rows = extract_dataset(&load_sessions(&a.data)?, &cfg, parallel)?;
            let mut f = create(&a.out)?;
            write_feature_csv(&mut f, &rows)?;
            f.flush()?;
            echo_beside(&a.out, &cfg)?;
            writeln!(
                stdout,
                "wrote {} windows to {}",
                rows.len(),
                a.out.display()
            )?;
        }
        Command::Train(a) => {
            let cfg = config_with(base, &a.overrides)?;
            let mut rows = load_features(&a.input, &cfg, parallel)?;
            if !a.all {
                rows = split_by_session(&rows, cfg.test_fraction)?.0;
            }
            let data = Dataset::from_feature_vectors(&rows)?;
            let forest = if parallel {
                Forest::train_parallel(&data, &cfg.forest)?
            } else {
                Forest::train(&data, &cfg.forest)?
            };
            forest.save(&a.model)?;
            echo_beside(&a.model, &cfg)?;
            writeln!(
                stdout,
                "trained {} trees on {} windows of {} subjects",
                forest.trees().len(),
                rows.len(),
                forest.labels().len()
            )?;
        }
        Command::Evaluate(a) => {
            let model = Forest::load(&a.model)?;
            let cfg = config_for_model(base, &a.overrides, &model)?;
            let mut rows = load_features(&a.input, &cfg, parallel)?;
            if !a.all {
                rows = split_by_session(&rows, cfg.test_fraction)?.1;
            }
            let report = evaluate_identification(&model, &rows)?.with_config(cfg.clone());
            write_text(&a.out, &report.to_json())?;
            let mut f = create(&a.out.with_extension("csv"))?;
            report.write_rates_csv(&mut f)?;
            f.flush()?;
            let mut f = create(&a.out.with_extension("confusion.csv"))?;
            report.write_confusion_csv(&mut f)?;
            f.flush()?;
            echo_beside(&a.out, &cfg)?;
            writeln!(
                stdout,
                "accuracy {:.4}  false match rate {:.4}  false non-match rate {:.4}  ({} windows)",
                report.accuracy,
                report.false_match_rate,
                report.false_non_match_rate,
                report.n_test
            )?;
        }
        Command::Identify(a) => {
            let model = Forest::load(&a.model)?;
            let cfg = config_for_model(base, &a.overrides, &model)?;
            let windows = session_features(&load_session(&a.acc, &a.gyro)?, &cfg)?;
            if windows.is_empty() {
                return Err(Error::Config("recording is shorter than one window".into()));
            }
            let mut votes = vec![0usize; model.labels().len()];
            for w in &windows {
                for (t, v) in votes.iter_mut().zip(model.votes(&w.values)?) {
                    *t += v;
                }
            }
            let pred = model.tally(votes);
            writeln!(stdout, "predicted {}", pred.label)?;
            writeln!(stdout, "windows {}", windows.len())?;
            writeln!(stdout, "label,votes")?;
            for (l, v) in model.labels().iter().zip(&pred.votes) {
                writeln!(stdout, "{l},{v}")?;
            }
            if let Some(out) = &a.out {
                let doc = Identification {
                    predicted: &pred.label,
                    windows: windows.len(),
                    votes: model
                        .labels()
                        .iter()
                        .map(String::as_str)
                        .zip(pred.votes.iter().copied())
                        .collect(),
                };
                let mut s = serde_json::to_string_pretty(&doc).expect("serializes");
                s.push('\n');
                write_text(out, &s)?;
            }
            echo(a.out.as_deref(), &cfg, stderr)?;
        }
        Command::Verify(a) => {
            let model = Forest::load(&a.model)?;
            let cfg = config_for_model(base, &a.overrides, &model)?;
            if let (Some(acc), Some(gyro), Some(claim)) = (&a.acc, &a.gyro, &a.claim) {
                if model.class_of(claim).is_none() {
                    return Err(crate::eval::EvalError::UnknownLabel(claim.clone()).into());
                }
                let windows = session_features(&load_session(acc, gyro)?, &cfg)?;
                let accepted = windows
                    .iter()
                    .map(|w| model.predict_vector(w).map(|p| p.label == *claim))
                    .collect::<std::result::Result<Vec<bool>, _>>()?;
                let n_acc = accepted.iter().filter(|&&b| b).count();
                let decision = if 2 * n_acc > accepted.len() {
                    "accept"
                } else {
                    "reject"
                };
                writeln!(
                    stdout,
                    "{decision} {claim} ({n_acc}/{} windows)",
                    accepted.len()
                )?;
                echo(a.out.as_deref(), &cfg, stderr)?;
                return Ok(());
            }
            let input = InputArgs {
                data: a.data.clone(),
                features: a.features.clone(),
            };
            if input.data.is_none() && input.features.is_none() {
                return Err(Error::Config(
                    "verify needs --data or --features, or --acc/--gyro/--claim".into(),
                ));
            }
            let mut rows = load_features(&input, &cfg, parallel)?;
            if !a.all {
                rows = split_by_session(&rows, cfg.test_fraction)?.1;
            }
            let report = evaluate_verification(&model, &rows, verification_seed(&cfg))?
                .with_config(cfg.clone());
            writeln!(
                stdout,
                "verification accuracy {:.4} over {} claims",
                report.accuracy, report.n_claims
            )?;
            if let Some(out) = &a.out {
                write_text(out, &report.to_json())?;
                let mut f = create(&out.with_extension("csv"))?;
                report.write_csv(&mut f)?;
                f.flush()?;
            }
            echo(a.out.as_deref(), &cfg, stderr)?;
        }
        Command::Sweep(a) => {
            let cfg = config_with(base, &a.overrides)?;
            let sessions = load_sessions(&a.data)?;
            let table = sweep(&sessions, a.param, &a.values, &cfg, a.repeats, parallel)?;
            let mut f = create(&a.out)?;
            table.write_csv(&mut f)?;
            f.flush()?;
            write_text(&a.out.with_extension("json"), &table.to_json())?;
            echo_beside(&a.out, &cfg)?;
            table.write_csv(stdout)?;
        }
        Command::RankFeatures(a) => {
            let model = Forest::load(&a.model)?;
            let ranking = model.feature_importance();
            writeln!(stdout, "rank,feature,split_count")?;
            for (i, (name, n)) in ranking.iter().take(a.top).enumerate() {
                writeln!(stdout, "{},{name},{n}", i + 1)?;
            }
            if let Some(out) = &a.out {
                let mut f = create(out)?;
                writeln!(f, "rank,feature,split_count")?;
                for (i, (name, n)) in ranking.iter().enumerate() {
                    writeln!(f, "{},{name},{n}", i + 1)?;
                }
                f.flush()?;
            }
            let mut cfg = base.clone();
            cfg.forest = model.config().clone();
            echo(a.out.as_deref(), &cfg, stderr)?;
        }
        Command::BandEnergy(a) => {
            let cfg = config_with(base, &a.overrides)?;
            let sessions = load_sessions(&a.data)?;
            let rate = sessions[0].acc.sample_rate_hz();
            if sessions
                .iter()
                .any(|s| s.acc.sample_rate_hz() != rate || s.gyro.sample_rate_hz() != rate)
            {
                return Err(Error::Config(
                    "band-energy needs a single sample rate".into(),
                ));
            }
            let traces = tremor_traces(&sessions, &cfg)?;
            let fractions = band_energy(&traces, rate, &a.bands)?;
            let mut text = String::from("lo_hz,hi_hz,fraction\n");
            for (&(lo, hi), f) in a.bands.iter().zip(&fractions) {
                text.push_str(&format!("{lo},{hi},{f}\n"));
            }
            stdout.write_all(text.as_bytes())?;
            if let Some(out) = &a.out {
                write_text(out, &text)?;
            }
            echo(a.out.as_deref(), &cfg, stderr)?;
        }
    }
    Ok(())
}
