//! On-disk formats pinned against files in `tests/golden`. Set
//! `UPDATE_GOLDEN=1` to rewrite them after an intentional format change.

use std::path::PathBuf;

use chrono::NaiveDate;
use tremor_id::eval::EvalReport;
use tremor_id::features::{
    feature_names, read_feature_csv, write_feature_csv, FeatureVector, WindowMeta, FEATURE_COUNT,
};
use tremor_id::forest::{Forest, ForestConfig, Node, Tree};
use tremor_id::pipeline::PipelineConfig;
use tremor_id::signal_io::{
    parse_recording, write_recording, Format, RecordingMeta, Sample, Sensor, SensorRecording,
};
use tremor_id::wflc::{filter_signal, WflcParams};

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from golden copy");
}

fn recording() -> SensorRecording {
    let meta = RecordingMeta {
        subject_id: "subject01".into(),
        session_id: "s1".into(),
        session_date: NaiveDate::from_ymd_opt(2016, 1, 4).unwrap(),
        device_id: "phone-a".into(),
        sensor: Sensor::Gyroscope,
    };
    let samples = vec![
        Sample {
            t_ms: 0,
            x: 0.5,
            y: -0.25,
            z: 9.81,
        },
        Sample {
            t_ms: 10,
            x: 0.125,
            y: 0.0,
            z: 9.8,
        },
        Sample {
            t_ms: 20,
            x: -1.0,
            y: 1e-7,
            z: 9.79,
        },
    ];
    SensorRecording::new(meta, 100.0, samples).unwrap()
}

#[test]
fn recording_csv_and_jsonl() {
    let rec = recording();
    for (format, name) in [
        (Format::Csv, "recording.csv"),
        (Format::Jsonl, "recording.jsonl"),
    ] {
        let mut buf = Vec::new();
        write_recording(&mut buf, &rec, format).unwrap();
        let text = String::from_utf8(buf).unwrap();
        golden(name, &text);
        assert_eq!(parse_recording(text.as_bytes(), format).unwrap(), rec);
    }
}

#[test]
fn feature_csv() {
    let row = FeatureVector {
        meta: WindowMeta {
            subject_id: "subject01".into(),
            session_id: "s1".into(),
            session_date: NaiveDate::from_ymd_opt(2016, 1, 4).unwrap(),
            device_id: "phone-a".into(),
        },
        values: (0..FEATURE_COUNT).map(|i| i as f64 * 0.5 - 3.0).collect(),
    };
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    golden("features.csv", &text);
    assert_eq!(read_feature_csv(text.as_bytes()).unwrap(), vec![row]);
}

#[test]
fn filter_csv() {
    let out = filter_signal(&[1.0, -2.0, 0.5], &WflcParams::pass_through()).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    golden("filter.csv", &String::from_utf8(buf).unwrap());
}

#[test]
fn model_json() {
    let names = feature_names().to_vec();
    let split = Tree::from_nodes(
        vec![
            Node::Split {
                feature: 19,
                threshold: 6.25,
                left: 1,
                right: 2,
            },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 1 },
        ],
        names.len(),
        2,
    )
    .unwrap();
    let cfg = ForestConfig {
        n_trees: 2,
        ..ForestConfig::default()
    };
    let forest = Forest::from_parts(
        vec![split, Tree::leaf(1, names.len())],
        vec!["subject01".into(), "subject02".into()],
        cfg,
        names,
    )
    .unwrap();
    let text = forest.to_json();
    golden("model.json", &text);
    assert_eq!(Forest::from_json(&text).unwrap(), forest);
}

#[test]
fn report_json() {
    let r = EvalReport::from_confusion(
        vec!["subject01".into(), "subject02".into()],
        vec![vec![8, 2], vec![3, 7]],
    )
    .unwrap();
    golden("report.json", &r.to_json());
    let mut buf = Vec::new();
    r.write_rates_csv(&mut buf).unwrap();
    golden("report.csv", &String::from_utf8(buf).unwrap());
}

#[test]
fn default_config_toml() {
    let text = PipelineConfig::default().to_toml();
    golden("config.toml", &text);
    assert_eq!(
        PipelineConfig::from_toml(&text).unwrap(),
        PipelineConfig::default()
    );
}
