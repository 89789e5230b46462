//! Session-disjoint evaluation: splitting, identification and verification
//! metrics, parameter sweeps and tremor band energy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::features::{periodogram, FeatureError, FeatureVector};
use crate::forest::{Dataset, Forest, ForestError};
use crate::pipeline::{extract_dataset, PipelineConfig, SessionRecordings};
use crate::seed::derive_seed;

pub const REPORT_FORMAT: &str = "tremor-id-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("subject '{0}' has fewer than two distinct session dates")]
    InsufficientSessions(String),
    #[error("test fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("empty test set")]
    EmptyTestSet,
    #[error("label '{0}' is not in the model's label set")]
    UnknownLabel(String),
    #[error("{0} claims for {1} windows")]
    ClaimCount(usize, usize),
    #[error("verification needs at least two enrolled identities")]
    SingleIdentity,
    #[error("band ({0}, {1}) Hz is outside [0, {2}] or reversed")]
    InvalidBand(f64, f64, f64),
    #[error("degenerate spectrum: total energy is zero")]
    DegenerateSpectrum,
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error("invalid sweep value {0} for {1}")]
    InvalidSweepValue(f64, SweepParam),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Splits windows so that every session date of a subject lands wholly on one
/// side. The most recent dates go to test until at least `test_fraction` of
/// that subject's windows are held out; the earliest date always stays in
/// train. Input order is preserved on both sides.
pub fn split_by_session(
    data: &[FeatureVector],
    test_fraction: f64,
) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>), EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(test_fraction));
    }
    let mut per_subject: BTreeMap<&str, BTreeMap<NaiveDate, usize>> = BTreeMap::new();
    for fv in data {
        *per_subject
            .entry(fv.subject())
            .or_default()
            .entry(fv.meta.session_date)
            .or_default() += 1;
    }
    let mut held_out: BTreeSet<(&str, NaiveDate)> = BTreeSet::new();
    for (subject, dates) in &per_subject {
        if dates.len() < 2 {
            return Err(EvalError::InsufficientSessions(subject.to_string()));
        }
        let total: usize = dates.values().sum();
        let mut in_test = 0usize;
        for (date, count) in dates.iter().rev().take(dates.len() - 1) {
            held_out.insert((subject, *date));
            in_test += count;
            if in_test as f64 >= test_fraction * total as f64 {
                break;
            }
        }
    }
    let (test, train): (Vec<_>, Vec<_>) = data
        .iter()
        .cloned()
        .partition(|fv| held_out.contains(&(fv.subject(), fv.meta.session_date)));
    Ok((train, test))
}

/// Error rates for one identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRates {
    pub label: String,
    /// Test windows whose true identity is this one.
    pub genuine: u64,
    /// Test windows from every other identity.
    pub impostor: u64,
    pub false_non_matches: u64,
    pub false_matches: u64,
    pub false_non_match_rate: f64,
    pub false_match_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub version: u32,
    pub accuracy: f64,
    /// Mean over identities of impostor windows accepted as that identity.
    pub false_match_rate: f64,
    /// Mean over identities of genuine windows given another identity.
    pub false_non_match_rate: f64,
    /// Pooled misidentification rate, `(n_test − trace) / n_test`.
    pub error_rate: f64,
    pub n_test: u64,
    pub labels: Vec<String>,
    /// `confusion[t][p]`: windows of identity `t` predicted as `p`.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassRates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

impl EvalReport {
    /// Derives every metric from a square confusion matrix. Identities without
    /// genuine (or impostor) windows are left out of the respective average.
    pub fn from_confusion(
        labels: Vec<String>,
        confusion: Vec<Vec<u64>>,
    ) -> Result<Self, EvalError> {
        let k = labels.len();
        if confusion.len() != k || confusion.iter().any(|r| r.len() != k) {
            return Err(EvalError::Forest(ForestError::DimensionMismatch {
                expected: k,
                got: confusion.len(),
            }));
        }
        let n_test: u64 = confusion.iter().flatten().sum();
        if n_test == 0 {
            return Err(EvalError::EmptyTestSet);
        }
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let per_class: Vec<ClassRates> = (0..k)
            .map(|c| {
                let genuine: u64 = confusion[c].iter().sum();
                let impostor = n_test - genuine;
                let false_non_matches = genuine - confusion[c][c];
                let false_matches = (0..k).filter(|&t| t != c).map(|t| confusion[t][c]).sum();
                ClassRates {
                    label: labels[c].clone(),
                    genuine,
                    impostor,
                    false_non_matches,
                    false_matches,
                    false_non_match_rate: ratio(false_non_matches, genuine).unwrap_or(0.0),
                    false_match_rate: ratio(false_matches, impostor).unwrap_or(0.0),
                }
            })
            .collect();
        let fnmr = mean(
            per_class
                .iter()
                .filter_map(|c| ratio(c.false_non_matches, c.genuine)),
        );
        let fmr = mean(
            per_class
                .iter()
                .filter_map(|c| ratio(c.false_matches, c.impostor)),
        );
        Ok(Self {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            accuracy: trace as f64 / n_test as f64,
            false_match_rate: fmr,
            false_non_match_rate: fnmr,
            error_rate: (n_test - trace) as f64 / n_test as f64,
            n_test,
            labels,
            confusion,
            per_class,
            config: None,
        })
    }

    pub fn with_config(mut self, config: PipelineConfig) -> Self {
        self.config = Some(config);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text)
            .map_err(|e| EvalError::Forest(ForestError::Format(e.to_string())))
    }

    /// Long-format confusion matrix: `true_label,predicted_label,count`.
    pub fn write_confusion_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "true_label,predicted_label,count")?;
        for (t, row) in self.confusion.iter().enumerate() {
            for (p, n) in row.iter().enumerate() {
                writeln!(out, "{},{},{n}", self.labels[t], self.labels[p])?;
            }
        }
        Ok(())
    }

    /// One row per identity plus an `all` row with the averaged rates.
    pub fn write_rates_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "label,genuine,impostor,false_non_matches,false_matches,false_non_match_rate,false_match_rate,accuracy"
        )?;
        for c in &self.per_class {
            let acc = ratio(c.genuine - c.false_non_matches, c.genuine).unwrap_or(0.0);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.label,
                c.genuine,
                c.impostor,
                c.false_non_matches,
                c.false_matches,
                c.false_non_match_rate,
                c.false_match_rate,
                acc
            )?;
        }
        let fn_total: u64 = self.per_class.iter().map(|c| c.false_non_matches).sum();
        writeln!(
            out,
            "all,{},,{fn_total},{fn_total},{},{},{}",
            self.n_test, self.false_non_match_rate, self.false_match_rate, self.accuracy
        )
    }
}

/// Per-window predictions and the resulting report.
pub fn evaluate_identification(
    model: &Forest,
    test: &[FeatureVector],
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let k = model.labels().len();
    let mut confusion = vec![vec![0u64; k]; k];
    for fv in test {
        let truth = model
            .class_of(fv.subject())
            .ok_or_else(|| EvalError::UnknownLabel(fv.subject().to_string()))?;
        let pred = model.predict_vector(fv)?;
        confusion[truth][pred.class] += 1;
    }
    EvalReport::from_confusion(model.labels().to_vec(), confusion)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub format: String,
    pub version: u32,
    /// Correct decisions over all claims.
    pub accuracy: f64,
    pub n_claims: u64,
    pub genuine_accepts: u64,
    pub genuine_rejects: u64,
    pub impostor_accepts: u64,
    pub impostor_rejects: u64,
    pub false_accept_rate: f64,
    pub false_reject_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

impl VerificationReport {
    pub fn with_config(mut self, config: PipelineConfig) -> Self {
        self.config = Some(config);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "n_claims,genuine_accepts,genuine_rejects,impostor_accepts,impostor_rejects,accuracy,false_accept_rate,false_reject_rate"
        )?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            self.n_claims,
            self.genuine_accepts,
            self.genuine_rejects,
            self.impostor_accepts,
            self.impostor_rejects,
            self.accuracy,
            self.false_accept_rate,
            self.false_reject_rate
        )
    }
}

/// A claim is accepted iff the model's prediction equals the claimed id.
pub fn verify_claims(
    model: &Forest,
    windows: &[FeatureVector],
    claims: &[String],
) -> Result<VerificationReport, EvalError> {
    if windows.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    if windows.len() != claims.len() {
        return Err(EvalError::ClaimCount(claims.len(), windows.len()));
    }
    let (mut ga, mut gr, mut ia, mut ir) = (0u64, 0u64, 0u64, 0u64);
    for (fv, claim) in windows.iter().zip(claims) {
        if model.class_of(claim).is_none() {
            return Err(EvalError::UnknownLabel(claim.clone()));
        }
        let accepted = model.predict_vector(fv)?.label == *claim;
        match (fv.subject() == claim, accepted) {
            (true, true) => ga += 1,
            (true, false) => gr += 1,
            (false, true) => ia += 1,
            (false, false) => ir += 1,
        }
    }
    let n = ga + gr + ia + ir;
    Ok(VerificationReport {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        accuracy: (ga + ir) as f64 / n as f64,
        n_claims: n,
        genuine_accepts: ga,
        genuine_rejects: gr,
        impostor_accepts: ia,
        impostor_rejects: ir,
        false_accept_rate: ratio(ia, ia + ir).unwrap_or(0.0),
        false_reject_rate: ratio(gr, ga + gr).unwrap_or(0.0),
        config: None,
    })
}

/// Pairs every window once with its own id and once with a different
/// enrolled id drawn with `seed`. Returns (windows, claims) in that order.
pub fn paired_claims(
    labels: &[String],
    test: &[FeatureVector],
    seed: u64,
) -> Result<(Vec<FeatureVector>, Vec<String>), EvalError> {
    if labels.len() < 2 {
        return Err(EvalError::SingleIdentity);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut windows = Vec::with_capacity(2 * test.len());
    let mut claims = Vec::with_capacity(2 * test.len());
    for fv in test {
        let truth = fv.subject();
        if !labels.iter().any(|l| l == truth) {
            return Err(EvalError::UnknownLabel(truth.to_string()));
        }
        let others: Vec<&String> = labels.iter().filter(|l| *l != truth).collect();
        windows.push(fv.clone());
        claims.push(truth.to_string());
        windows.push(fv.clone());
        claims.push((*others.choose(&mut rng).expect("two identities")).clone());
    }
    Ok((windows, claims))
}

/// Verification over 1:1 genuine and impostor claims.
pub fn evaluate_verification(
    model: &Forest,
    test: &[FeatureVector],
    seed: u64,
) -> Result<VerificationReport, EvalError> {
    let (windows, claims) = paired_claims(model.labels(), test, seed)?;
    verify_claims(model, &windows, &claims)
}

/// Fraction of periodogram energy in each band, pooled over all traces.
/// Bands are closed intervals and may overlap.
pub fn band_energy(
    traces: &[Vec<f64>],
    sample_rate_hz: f64,
    bands: &[(f64, f64)],
) -> Result<Vec<f64>, EvalError> {
    let nyquist = sample_rate_hz / 2.0;
    for &(lo, hi) in bands {
        if !(lo >= 0.0 && hi <= nyquist && lo <= hi) {
            return Err(EvalError::InvalidBand(lo, hi, nyquist));
        }
    }
    let mut in_band = vec![0.0; bands.len()];
    let mut total = 0.0;
    for t in traces {
        let p = periodogram(t, sample_rate_hz)?;
        for (&pw, &f) in p.power.iter().zip(&p.freqs) {
            total += pw;
            for (acc, &(lo, hi)) in in_band.iter_mut().zip(bands) {
                if f >= lo && f <= hi {
                    *acc += pw;
                }
            }
        }
    }
    if total <= 0.0 {
        return Err(EvalError::DegenerateSpectrum);
    }
    Ok(in_band.into_iter().map(|e| e / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    WindowS,
    NTrees,
    Overlap,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::WindowS => "window_s",
            Self::NTrees => "n_trees",
            Self::Overlap => "overlap",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Self::WindowS => 1,
            Self::NTrees => 2,
            Self::Overlap => 3,
        }
    }

    fn apply(self, cfg: &mut PipelineConfig, value: f64) -> Result<(), EvalError> {
        match self {
            Self::WindowS => cfg.window_s = value,
            Self::Overlap => cfg.overlap = value,
            Self::NTrees => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(EvalError::InvalidSweepValue(value, self));
                }
                cfg.forest.n_trees = value as usize;
            }
        }
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "window_s" => Ok(Self::WindowS),
            "n_trees" => Ok(Self::NTrees),
            "overlap" => Ok(Self::Overlap),
            _ => Err(format!("unknown sweep parameter '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean_accuracy: f64,
    /// One entry per repeat.
    pub accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub format: String,
    pub version: u32,
    pub parameter: SweepParam,
    pub rows: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

impl SweepTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serializes");
        s.push('\n');
        s
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{},mean_accuracy,repeats", self.parameter)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{}",
                r.value,
                r.mean_accuracy,
                r.accuracies.len()
            )?;
        }
        Ok(())
    }
}

/// Forest seed for one sweep run.
pub fn sweep_seed(base: u64, param: SweepParam, value: f64, repeat: usize) -> u64 {
    derive_seed(base, &[param.tag(), value.to_bits(), repeat as u64])
}

/// Trains on the train split of `features` and evaluates on the test split.
pub fn train_and_evaluate(
    features: &[FeatureVector],
    cfg: &PipelineConfig,
    parallel: bool,
) -> Result<(Forest, EvalReport)> {
    let (train, test) = split_by_session(features, cfg.test_fraction)?;
    let data = Dataset::from_feature_vectors(&train)?;
    let forest = if parallel {
        Forest::train_parallel(&data, &cfg.forest)?
    } else {
        Forest::train(&data, &cfg.forest)?
    };
    let report = evaluate_identification(&forest, &test)?.with_config(cfg.clone());
    Ok((forest, report))
}

/// Extract, split, train and evaluate in one go.
pub fn run_evaluation(
    sessions: &[SessionRecordings],
    cfg: &PipelineConfig,
    parallel: bool,
) -> Result<(Forest, EvalReport)> {
    cfg.validate()?;
    let features = extract_dataset(sessions, cfg, parallel)?;
    train_and_evaluate(&features, cfg, parallel)
}

/// Mean test accuracy per parameter value. Each (value, repeat) run trains
/// with the forest seed `sweep_seed(cfg.forest.rng_seed, ..)`. Features are
/// extracted once per value (once overall when sweeping `n_trees`). With
/// `parallel`, runs execute on the rayon pool; results do not change.
pub fn sweep(
    sessions: &[SessionRecordings],
    param: SweepParam,
    values: &[f64],
    cfg: &PipelineConfig,
    repeats: usize,
    parallel: bool,
) -> Result<SweepTable> {
    if values.is_empty() || repeats == 0 {
        return Err(EvalError::EmptySweep.into());
    }
    let mut values: Vec<f64> = values.to_vec();
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(EvalError::InvalidSweepValue(*v, param).into());
    }
    values.sort_by(f64::total_cmp);
    values.dedup();

    let label = |v: f64| format!("{param}={v}");
    let configs: Vec<PipelineConfig> = values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            param.apply(&mut c, v)?;
            c.validate().map_err(|e| e.context(label(v)))?;
            Ok(c)
        })
        .collect::<Result<_>>()?;

    let features: Vec<Vec<FeatureVector>> = if param == SweepParam::NTrees {
        vec![extract_dataset(sessions, cfg, parallel)?]
    } else {
        values
            .iter()
            .zip(&configs)
            .map(|(&v, c)| extract_dataset(sessions, c, parallel).map_err(|e| e.context(label(v))))
            .collect::<Result<_>>()?
    };

    let points: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|i| (0..repeats).map(move |r| (i, r)))
        .collect();
    let run = |&(i, r): &(usize, usize)| -> Result<f64> {
        let mut c = configs[i].clone();
        c.forest.rng_seed = sweep_seed(cfg.forest.rng_seed, param, values[i], r);
        let fv = &features[if param == SweepParam::NTrees { 0 } else { i }];
        let (_, report) =
            train_and_evaluate(fv, &c, false).map_err(|e| e.context(label(values[i])))?;
        Ok(report.accuracy)
    };
    let accs: Vec<f64> = if parallel {
        points.par_iter().map(run).collect::<Result<_>>()?
    } else {
        points.iter().map(run).collect::<Result<_>>()?
    };
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let accuracies = accs[i * repeats..(i + 1) * repeats].to_vec();
            SweepRow {
                value,
                mean_accuracy: accuracies.iter().sum::<f64>() / repeats as f64,
                accuracies,
            }
        })
        .collect();
    Ok(SweepTable {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        parameter: param,
        rows,
        config: Some(cfg.clone()),
    })
}

/// Seed used for impostor claims when none is configured otherwise.
pub fn verification_seed(cfg: &PipelineConfig) -> u64 {
    derive_seed(cfg.verification_seed, &[0x5645_5249])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{WindowMeta, FEATURE_COUNT};
    use crate::forest::ForestConfig;
    use crate::forest::Tree;

    fn fv(subject: &str, session: &str, day: u32, x: f64) -> FeatureVector {
        FeatureVector {
            meta: WindowMeta {
                subject_id: subject.into(),
                session_id: session.into(),
                session_date: NaiveDate::from_ymd_opt(2016, 1, day).unwrap(),
                device_id: "d".into(),
            },
            values: vec![x; FEATURE_COUNT],
        }
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn hand_confusion_example() {
        let r = EvalReport::from_confusion(labels(2), vec![vec![8, 2], vec![3, 7]]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.false_non_match_rate, 0.25);
        assert_eq!(r.false_match_rate, 0.25);
        assert_eq!(r.error_rate, 0.25);
        assert_eq!(r.n_test, 20);
        assert_eq!(r.per_class[0].false_match_rate, 0.3);
        assert_eq!(r.per_class[1].false_non_match_rate, 0.3);
    }

    #[test]
    fn perfect_confusion() {
        let r = EvalReport::from_confusion(
            labels(3),
            vec![vec![4, 0, 0], vec![0, 5, 0], vec![0, 0, 1]],
        )
        .unwrap();
        assert_eq!(
            (r.accuracy, r.false_match_rate, r.false_non_match_rate),
            (1.0, 0.0, 0.0)
        );
    }

    #[test]
    fn macro_and_pooled_rates_differ_on_imbalance() {
        // Class 0: 1 of 10 wrong; class 1: 1 of 2 wrong.
        let r = EvalReport::from_confusion(labels(2), vec![vec![9, 1], vec![1, 1]]).unwrap();
        assert!((r.false_non_match_rate - (0.1 + 0.5) / 2.0).abs() < 1e-15);
        assert!((r.error_rate - 2.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn confusion_errors() {
        assert_eq!(
            EvalReport::from_confusion(labels(2), vec![vec![0, 0], vec![0, 0]]),
            Err(EvalError::EmptyTestSet)
        );
        assert!(EvalReport::from_confusion(labels(2), vec![vec![1, 0]]).is_err());
    }

    #[test]
    fn split_example() {
        let mut data: Vec<FeatureVector> = (0..60).map(|_| fv("a", "s1", 4, 0.0)).collect();
        data.extend((0..40).map(|_| fv("a", "s2", 11, 0.0)));
        let (train, test) = split_by_session(&data, 0.25).unwrap();
        assert_eq!(train.len(), 60);
        assert_eq!(test.len(), 40);
        assert!(train.iter().all(|f| f.meta.session_id == "s1"));
        assert!(test.iter().all(|f| f.meta.session_id == "s2"));
    }

    #[test]
    fn split_takes_several_dates_when_needed() {
        let mut data = Vec::new();
        for (k, day) in [4u32, 11, 18, 25].iter().enumerate() {
            data.extend((0..10).map(|_| fv("a", &format!("s{k}"), *day, 0.0)));
        }
        let (train, test) = split_by_session(&data, 0.5).unwrap();
        assert_eq!((train.len(), test.len()), (20, 20));
        let (train, test) = split_by_session(&data, 0.99).unwrap();
        assert_eq!((train.len(), test.len()), (10, 30));
    }

    #[test]
    fn split_errors() {
        let data: Vec<FeatureVector> = (0..5).map(|_| fv("a", "s1", 4, 0.0)).collect();
        assert_eq!(
            split_by_session(&data, 0.25),
            Err(EvalError::InsufficientSessions("a".into()))
        );
        assert_eq!(
            split_by_session(&data, 0.0),
            Err(EvalError::InvalidFraction(0.0))
        );
    }

    fn constant_forest(class: usize, n: usize) -> Forest {
        Forest::from_parts(
            vec![Tree::leaf(class, FEATURE_COUNT)],
            labels(n),
            ForestConfig::default(),
            crate::features::feature_names().to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn constant_predictor_verification_closed_form() {
        // Two identities, n0 windows of c0 and n1 of c1, model always says c0.
        // Genuine claims: n0 accepted correctly, n1 rejected wrongly.
        // Impostor claims: c1 windows claim c0 (accepted, wrong); c0 windows
        // claim c1 (rejected, right). Accuracy = 2·n0 / 2(n0 + n1).
        let model = constant_forest(0, 2);
        let mut test: Vec<FeatureVector> = (0..7).map(|_| fv("c0", "s", 4, 0.0)).collect();
        test.extend((0..3).map(|_| fv("c1", "s", 4, 0.0)));
        let r = evaluate_verification(&model, &test, 1).unwrap();
        assert_eq!(r.accuracy, 0.7);
        assert_eq!(r.n_claims, 20);
        assert_eq!((r.genuine_accepts, r.genuine_rejects), (7, 3));
        assert_eq!((r.impostor_accepts, r.impostor_rejects), (3, 7));
    }

    #[test]
    fn identification_unknown_label() {
        let model = constant_forest(0, 2);
        let test = vec![fv("zz", "s", 4, 0.0)];
        assert_eq!(
            evaluate_identification(&model, &test),
            Err(EvalError::UnknownLabel("zz".into()))
        );
        assert_eq!(
            verify_claims(&model, &[fv("c0", "s", 4, 0.0)], &["zz".into()]),
            Err(EvalError::UnknownLabel("zz".into()))
        );
    }

    #[test]
    fn paired_claims_are_deterministic_and_distinct() {
        let l = labels(5);
        let test: Vec<FeatureVector> = (0..20)
            .map(|i| fv(&format!("c{}", i % 5), "s", 4, 0.0))
            .collect();
        let (w1, c1) = paired_claims(&l, &test, 9).unwrap();
        let (_, c2) = paired_claims(&l, &test, 9).unwrap();
        assert_eq!(c1, c2);
        for pair in w1.chunks(2).zip(c1.chunks(2)) {
            let (w, c) = pair;
            assert_eq!(c[0], w[0].subject());
            assert_ne!(c[1], w[1].subject());
        }
        assert_eq!(
            paired_claims(&l[..1], &test, 9),
            Err(EvalError::SingleIdentity)
        );
    }

    fn tone(f: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / 100.0).sin())
            .collect()
    }

    #[test]
    fn band_energy_tones() {
        let e = band_energy(&[tone(5.0, 1000)], 100.0, &[(4.0, 7.0), (7.0, 10.0)]).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!(e[1].abs() < 1e-12);
        let e = band_energy(&[tone(20.0, 1000)], 100.0, &[(4.0, 7.0)]).unwrap();
        assert!(e[0].abs() < 1e-12);
    }

    #[test]
    fn band_energy_errors() {
        assert_eq!(
            band_energy(&[vec![0.0; 100]], 100.0, &[(4.0, 7.0)]),
            Err(EvalError::DegenerateSpectrum)
        );
        assert!(matches!(
            band_energy(&[tone(5.0, 100)], 100.0, &[(4.0, 60.0)]),
            Err(EvalError::InvalidBand(..))
        ));
    }

    #[test]
    fn report_json_round_trip() {
        let r = EvalReport::from_confusion(labels(2), vec![vec![8, 2], vec![3, 7]])
            .unwrap()
            .with_config(PipelineConfig::default());
        assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
        let mut csv = Vec::new();
        r.write_confusion_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "true_label,predicted_label,count\nc0,c0,8\nc0,c1,2\nc1,c0,3\nc1,c1,7\n"
        );
    }

    #[test]
    fn sweep_param_parsing() {
        assert_eq!("window-s".parse::<SweepParam>(), Ok(SweepParam::WindowS));
        assert_eq!("n_trees".parse::<SweepParam>(), Ok(SweepParam::NTrees));
        assert!("depth".parse::<SweepParam>().is_err());
        let mut c = PipelineConfig::default();
        assert!(SweepParam::NTrees.apply(&mut c, 2.5).is_err());
    }
}
