use std::path::{Path, PathBuf};
use std::process::Command;

use tremor_id::cli::run_command_with;
use tremor_id::eval::EvalReport;
use tremor_id::features::{feature_names, is_periodogram_feature, read_feature_csv, FEATURE_COUNT};
use tremor_id::pipeline::{write_sessions, PipelineConfig, SessionRecordings};
use tremor_id::signal_io::{Format, Sample, SensorRecording};
use tremor_id::synth::{gen_dataset, SynthConfig};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["tremor-id"];
    argv.extend_from_slice(args);
    let code = run_command_with(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &[&str]) -> Run {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    r
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_dir(dir: &Path, extra: &[&str]) -> PathBuf {
    let data = dir.join("data");
    let mut args = vec![
        "synth",
        "--out",
        s(&data),
        "--subjects",
        "5",
        "--sessions",
        "3",
        "--seed",
        "7",
        "--duration-s",
        "12",
    ];
    args.extend_from_slice(extra);
    ok(&args);
    data
}

#[test]
fn synth_train_evaluate_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dir(dir.path(), &[]);
    assert!(data.join("effective_config.toml").exists());
    assert_eq!(std::fs::read_dir(&data).unwrap().count(), 5 * 3 * 2 + 1);

    let model = dir.path().join("model.json");
    let report = dir.path().join("report.json");
    ok(&[
        "train",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--n-trees",
        "30",
    ]);
    let r = ok(&[
        "evaluate",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--out",
        s(&report),
    ]);
    assert!(r.stdout.starts_with("accuracy "));

    let text = std::fs::read_to_string(&report).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(json["accuracy"].is_f64());
    let parsed = EvalReport::from_json(&text).unwrap();
    assert_eq!(parsed.config.unwrap().forest.n_trees, 30);
    for echo in [
        "model.config.toml",
        "report.config.toml",
        "report.csv",
        "report.confusion.csv",
    ] {
        assert!(dir.path().join(echo).exists(), "{echo}");
    }
    let echoed = PipelineConfig::load(&dir.path().join("model.config.toml")).unwrap();
    assert_eq!(echoed.forest.n_trees, 30);
}

#[test]
fn extract_then_train_from_features() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dir(dir.path(), &["--format", "jsonl"]);
    let features = dir.path().join("features.csv");
    ok(&[
        "extract",
        "--data",
        s(&data),
        "--out",
        s(&features),
        "--window-s",
        "2",
    ]);
    let rows = read_feature_csv(std::io::BufReader::new(
        std::fs::File::open(&features).unwrap(),
    ))
    .unwrap();
    // 12 s minus trims leaves 11.8 s: five 2 s windows per session.
    assert_eq!(rows.len(), 5 * 3 * 5);
    assert!(rows.iter().all(|r| r.values.len() == FEATURE_COUNT));

    let model = dir.path().join("m.json");
    ok(&[
        "train",
        "--features",
        s(&features),
        "--model",
        s(&model),
        "--n-trees",
        "10",
        "--all",
    ]);
    let report = dir.path().join("r.json");
    ok(&[
        "evaluate",
        "--features",
        s(&features),
        "--model",
        s(&model),
        "--out",
        s(&report),
        "--all",
    ]);
}

fn zero_session(dir: &Path) {
    let recs = gen_dataset(&SynthConfig {
        subjects: 1,
        sessions: 1,
        duration_s: 3.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let zero = |r: &SensorRecording| {
        let samples = r
            .samples()
            .iter()
            .map(|s| Sample {
                x: 0.0,
                y: 0.0,
                z: 0.0,
                ..*s
            })
            .collect();
        SensorRecording::new(r.meta().clone(), r.sample_rate_hz(), samples).unwrap()
    };
    let (acc, gyro) = &recs[0];
    write_sessions(
        dir,
        &[SessionRecordings {
            acc: zero(acc),
            gyro: zero(gyro),
        }],
        Format::Csv,
    )
    .unwrap();
}

#[test]
fn extract_of_silence_gives_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("zeros");
    zero_session(&data);
    let out = dir.path().join("f.csv");
    for source in ["raw", "tremor", "residual"] {
        ok(&[
            "extract",
            "--data",
            s(&data),
            "--out",
            s(&out),
            "--source",
            source,
        ]);
        let rows =
            read_feature_csv(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
        assert!(!rows.is_empty());
        for r in rows {
            assert_eq!(r.values, vec![0.0; FEATURE_COUNT], "source {source}");
        }
    }
}

#[test]
fn rank_features_prefers_periodogram_when_only_frequency_differs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let config = dir.path().join("freq_only.toml");
    let mut cfg = PipelineConfig::default();
    cfg.synth.subjects = 6;
    cfg.synth.duration_s = 20.0;
    cfg.synth.profile.vary_amplitudes = false;
    cfg.synth.profile.session_gain_spread = 0.0;
    cfg.save(&config).unwrap();
    ok(&["--config", s(&config), "synth", "--out", s(&data)]);
    let model = dir.path().join("model.json");
    ok(&[
        "--config",
        s(&config),
        "--jobs",
        "2",
        "train",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--all",
    ]);
    let ranking = dir.path().join("ranking.csv");
    let r = ok(&[
        "rank-features",
        "--model",
        s(&model),
        "--top",
        "5",
        "--out",
        s(&ranking),
    ]);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "rank,feature,split_count");
    assert_eq!(lines.len(), 6);
    assert!(
        lines[1..]
            .iter()
            .any(|l| is_periodogram_feature(l.split(',').nth(1).unwrap())),
        "{}",
        r.stdout
    );
    let full = std::fs::read_to_string(&ranking).unwrap();
    assert_eq!(full.lines().count(), feature_names().len() + 1);
}

#[test]
fn identify_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dir(dir.path(), &[]);
    let model = dir.path().join("model.json");
    ok(&[
        "train",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--n-trees",
        "40",
    ]);

    let acc = data.join("subject03_s3_acc.csv");
    let gyro = data.join("subject03_s3_gyro.csv");
    let out = dir.path().join("who.json");
    let r = ok(&[
        "identify",
        "--model",
        s(&model),
        "--acc",
        s(&acc),
        "--gyro",
        s(&gyro),
        "--out",
        s(&out),
    ]);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("predicted subject03"));
    assert!(lines.next().unwrap().starts_with("windows "));
    assert_eq!(lines.next(), Some("label,votes"));
    let votes: usize = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(votes % 40, 0);
    assert!(dir.path().join("who.config.toml").exists());

    let r = ok(&[
        "verify",
        "--model",
        s(&model),
        "--acc",
        s(&acc),
        "--gyro",
        s(&gyro),
        "--claim",
        "subject03",
    ]);
    assert!(r.stdout.starts_with("accept subject03"), "{}", r.stdout);
    assert!(r.stderr.contains("# effective config"));
    let r = ok(&[
        "verify",
        "--model",
        s(&model),
        "--acc",
        s(&acc),
        "--gyro",
        s(&gyro),
        "--claim",
        "subject01",
    ]);
    assert!(r.stdout.starts_with("reject subject01"), "{}", r.stdout);

    let report = dir.path().join("verify.json");
    let r = ok(&[
        "verify",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--out",
        s(&report),
    ]);
    assert!(r.stdout.starts_with("verification accuracy"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(
        json["n_claims"].as_u64().unwrap(),
        json["genuine_accepts"].as_u64().unwrap()
            + json["genuine_rejects"].as_u64().unwrap()
            + json["impostor_accepts"].as_u64().unwrap()
            + json["impostor_rejects"].as_u64().unwrap()
    );

    let r = run(&[
        "verify",
        "--model",
        s(&model),
        "--acc",
        s(&acc),
        "--gyro",
        s(&gyro),
        "--claim",
        "nobody",
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("eval:"), "{}", r.stderr);
}

#[test]
fn sweep_and_band_energy_and_filter() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dir(dir.path(), &[]);
    let out = dir.path().join("sweep.csv");
    let r = ok(&[
        "sweep",
        "--data",
        s(&data),
        "--param",
        "window-s",
        "--values",
        "1,0.5",
        "--n-trees",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(
        r.stdout.lines().next(),
        Some("window_s,mean_accuracy,repeats")
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.5,") && rows[1].starts_with("1,"));
    assert!(dir.path().join("sweep.json").exists());

    let r = ok(&["band-energy", "--data", s(&data)]);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "lo_hz,hi_hz,fraction");
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let f: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&f));
    }

    let filtered = dir.path().join("filtered.csv");
    ok(&[
        "filter",
        "--input",
        s(&data.join("subject01_s1_acc.csv")),
        "--axis",
        "y",
        "--out",
        s(&filtered),
    ]);
    let text = std::fs::read_to_string(&filtered).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("k,input,tremor,voluntary,residual,omega0")
    );
    // 12 s at 100 Hz minus 10 samples trimmed at each end.
    assert_eq!(text.lines().count(), 1 + 1180);
    assert!(dir.path().join("filtered.config.toml").exists());
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["train", "--model", "m.json"]).code, 2);
    assert_eq!(
        run(&["sweep", "--data", "d", "--param", "depth", "--values", "1", "--out", "o"]).code,
        2
    );
    assert_eq!(
        run(&["train", "--data", "a", "--features", "b", "--model", "m"]).code,
        2
    );

    let r = run(&[
        "filter",
        "--input",
        s(&dir.path().join("missing.csv")),
        "--out",
        s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("error: signal_io:"), "{}", r.stderr);

    let r = run(&[
        "rank-features",
        "--model",
        s(&dir.path().join("missing.json")),
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("error: forest:"), "{}", r.stderr);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "window_s = -1.0\n").unwrap();
    let data = synth_dir(dir.path(), &[]);
    let r = run(&[
        "--config",
        s(&bad),
        "extract",
        "--data",
        s(&data),
        "--out",
        s(&dir.path().join("f.csv")),
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("config:"), "{}", r.stderr);
}

#[test]
fn binary_reads_default_config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("env.toml");
    let mut cfg = PipelineConfig::default();
    cfg.synth.subjects = 2;
    cfg.synth.sessions = 2;
    cfg.synth.duration_s = 3.0;
    cfg.save(&config).unwrap();
    let data = dir.path().join("data");
    let out = Command::new(env!("CARGO_BIN_EXE_tremor-id"))
        .args(["synth", "--out", s(&data)])
        .env("TREMOR_ID_CONFIG", &config)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(&data).unwrap().count(), 2 * 2 * 2 + 1);

    let out = Command::new(env!("CARGO_BIN_EXE_tremor-id"))
        .arg("no-such-command")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unrecognized subcommand"));
}
