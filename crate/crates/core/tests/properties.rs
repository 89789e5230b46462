use std::collections::BTreeSet;

use chrono::NaiveDate;
use proptest::prelude::*;

use tremor_id::eval::{split_by_session, EvalReport};
use tremor_id::features::{
    signal_features, FeatureOptions, FeatureVector, WindowMeta, FEATURE_COUNT,
};
use tremor_id::forest::{Dataset, Forest, ForestConfig};
use tremor_id::signal_io::{
    magnitude, parse_recording, segment_windows, write_recording, Format, RecordingMeta, Sample,
    Sensor, SensorRecording,
};
use tremor_id::wflc::{filter_signal, WflcParams};

fn meta(sensor: Sensor) -> RecordingMeta {
    RecordingMeta {
        subject_id: "subject01".into(),
        session_id: "s1".into(),
        session_date: NaiveDate::from_ymd_opt(2016, 1, 4).unwrap(),
        device_id: "dev".into(),
        sensor,
    }
}

prop_compose! {
    fn recording(min: usize, max: usize)(
        values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), min..max),
        gyro in any::<bool>(),
    ) -> SensorRecording {
        let samples = values
            .into_iter()
            .enumerate()
            .map(|(i, (x, y, z))| Sample { t_ms: 10 * i as i64, x, y, z })
            .collect();
        let sensor = if gyro { Sensor::Gyroscope } else { Sensor::Accelerometer };
        SensorRecording::new(meta(sensor), 100.0, samples).unwrap()
    }
}

fn signal(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, min..max)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn recordings_round_trip(rec in recording(2, 60), jsonl in any::<bool>()) {
        let format = if jsonl { Format::Jsonl } else { Format::Csv };
        let mut buf = Vec::new();
        write_recording(&mut buf, &rec, format).unwrap();
        prop_assert_eq!(parse_recording(buf.as_slice(), format).unwrap(), rec);
    }

    #[test]
    fn magnitude_symmetries(x in -1e6f64..1e6, y in -1e6f64..1e6, z in -1e6f64..1e6) {
        let m = magnitude(x, y, z);
        prop_assert!(m >= 0.0);
        prop_assert_eq!(m, magnitude(-x, y, z));
        prop_assert_eq!(m, magnitude(x, -y, -z));
        prop_assert!(rel_close(m, magnitude(z, x, y), 1e-15));
        prop_assert!(rel_close(m, magnitude(y, z, x), 1e-15));
    }

    #[test]
    fn disjoint_windows_partition_the_prefix(rec in recording(2, 400), window_s in 0.02f64..1.5) {
        match segment_windows(&rec, window_s, 0.0) {
            Ok(ws) => {
                let len = ws[0].len();
                prop_assert_eq!(ws.len(), rec.len() / len);
                for (i, w) in ws.iter().enumerate() {
                    prop_assert_eq!(w.start_index, i * len);
                    prop_assert_eq!(w.len(), len);
                    let src = &rec.samples()[w.start_index..w.start_index + len];
                    prop_assert!(src.iter().zip(&w.x).all(|(s, x)| s.x == *x));
                }
            }
            Err(_) => prop_assert!((window_s * 100.0).round() as usize > rec.len() || (window_s * 100.0).round() < 2.0),
        }
    }

    #[test]
    fn overlapping_windows_step_by_hop(rec in recording(100, 400), overlap in 0.0f64..0.95) {
        let ws = segment_windows(&rec, 0.5, overlap).unwrap();
        let hop = ((50.0 * (1.0 - overlap)).round() as usize).max(1);
        prop_assert_eq!(ws.len(), (rec.len() - 50) / hop + 1);
        for pair in ws.windows(2) {
            prop_assert_eq!(pair[1].start_index - pair[0].start_index, hop);
        }
    }

    #[test]
    fn features_are_finite(x in signal(4, 200)) {
        let f = signal_features(&x, 100.0, &FeatureOptions::default()).unwrap();
        prop_assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn spectral_features_ignore_circular_shift(x in signal(8, 128), shift in 0usize..128) {
        let opts = FeatureOptions::default();
        let mut shifted = x.clone();
        let k = shift % x.len();
        shifted.rotate_left(k);
        let a = signal_features(&x, 100.0, &opts).unwrap();
        let b = signal_features(&shifted, 100.0, &opts).unwrap();
        for i in 0..a.len() {
            prop_assert!(rel_close(a[i], b[i], 1e-6), "feature {}: {} vs {}", i, a[i], b[i]);
        }
    }

    #[test]
    fn scaling_scales_linear_features(x in signal(8, 128), c in 0.1f64..10.0) {
        let opts = FeatureOptions::default();
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let a = signal_features(&x, 100.0, &opts).unwrap();
        let b = signal_features(&scaled, 100.0, &opts).unwrap();
        // mean, std, avg_dev, rms, max scale with c; spectral centroid and
        // std (frequency moments) do not change.
        for i in 0..5 {
            prop_assert!(rel_close(b[i], c * a[i], 1e-9));
        }
        for i in [5, 6, 12, 13] {
            prop_assert!(rel_close(b[i], a[i], 1e-9));
        }
    }

    #[test]
    fn filter_reconstructs_input(x in signal(2, 300), mu in 0.0f64..0.05, mu0 in 0.0f64..1e-4) {
        let params = WflcParams { amplitude_gain: mu, frequency_gain: mu0, ..WflcParams::default() };
        let out = filter_signal(&x, &params).unwrap();
        for (k, &v) in x.iter().enumerate() {
            let sum = out.tremor[k] + out.voluntary[k] + out.residual[k];
            prop_assert!((v - sum).abs() <= 1e-9 * v.abs().max(1.0));
        }
    }

    #[test]
    fn fully_grown_tree_fits_distinct_rows(rows in prop::collection::btree_set((0i32..50, 0i32..50), 2..40)) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|(a, b)| vec![a as f64, b as f64]).collect();
        let labels: Vec<String> = rows.iter().map(|r| format!("c{}", (r[0] as i32 + 3 * r[1] as i32) % 3)).collect();
        let data = Dataset::new(vec!["a".into(), "b".into()], rows.clone(), labels.clone()).unwrap();
        let cfg = ForestConfig { n_trees: 1, bootstrap: false, attr_fraction: 1.0, ..ForestConfig::default() };
        let f = Forest::train(&data, &cfg).unwrap();
        for (r, l) in rows.iter().zip(&labels) {
            prop_assert_eq!(&f.predict(r).unwrap().label, l);
        }
    }

    #[test]
    fn confusion_rates_are_consistent(m in prop::collection::vec(prop::collection::vec(0u64..20, 3), 3)) {
        prop_assume!(m.iter().flatten().sum::<u64>() > 0);
        let r = EvalReport::from_confusion(vec!["a".into(), "b".into(), "c".into()], m.clone()).unwrap();
        let trace: u64 = (0..3).map(|i| m[i][i]).sum();
        prop_assert_eq!(r.n_test, m.iter().flatten().sum::<u64>());
        prop_assert_eq!(r.accuracy, trace as f64 / r.n_test as f64);
        prop_assert!((r.error_rate - (1.0 - r.accuracy)).abs() < 1e-12);
        for v in [r.accuracy, r.false_match_rate, r.false_non_match_rate] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn split_keeps_sessions_whole(
        counts in prop::collection::vec(prop::collection::vec(1usize..30, 2..6), 1..5),
        fraction in 0.05f64..0.95,
    ) {
        let mut data = Vec::new();
        for (s, sessions) in counts.iter().enumerate() {
            for (k, &n) in sessions.iter().enumerate() {
                for _ in 0..n {
                    data.push(FeatureVector {
                        meta: WindowMeta {
                            subject_id: format!("subject{s:02}"),
                            session_id: format!("s{k}"),
                            session_date: NaiveDate::from_ymd_opt(2016, 1, 1 + k as u32).unwrap(),
                            device_id: "d".into(),
                        },
                        values: vec![0.0; FEATURE_COUNT],
                    });
                }
            }
        }
        let (train, test) = split_by_session(&data, fraction).unwrap();
        prop_assert_eq!(train.len() + test.len(), data.len());
        let key = |f: &FeatureVector| (f.meta.subject_id.clone(), f.meta.session_id.clone());
        let a: BTreeSet<_> = train.iter().map(key).collect();
        let b: BTreeSet<_> = test.iter().map(key).collect();
        prop_assert!(a.is_disjoint(&b));
        for (s, sessions) in counts.iter().enumerate() {
            let id = format!("subject{s:02}");
            let total: usize = sessions.iter().sum();
            let held = test.iter().filter(|f| f.meta.subject_id == id).count();
            prop_assert!(held as f64 >= fraction * total as f64 || held == total - sessions[0]);
            prop_assert!(train.iter().any(|f| f.meta.subject_id == id));
        }
    }
}
