//! Random-forest classifier built from scratch: bootstrap-bagged, fully grown
//! Gini trees with random attribute subsets, majority voting, split-count
//! feature ranking and a versioned JSON model file.
//!
//! Training is deterministic: tree `i` draws from its own ChaCha stream
//! (`seed`, stream `i`), so serial and parallel training build identical
//! forests.

mod tree;

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::features::{feature_names, FeatureVector};

use tree::{grow_tree, TrainSet};
pub use tree::{Node, Tree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("no training data")]
    EmptyData,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid forest config: {0}")]
    InvalidConfig(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("malformed model: {0}")]
    Format(String),
    #[error("unsupported model version {found} (this build reads version {expected})")]
    Version { found: u64, expected: u64 },
    #[error("i/o error: {0}")]
    Io(String),
}

/// How attribute subsets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrSampling {
    /// A fresh subset at every node.
    #[default]
    PerNode,
    /// One subset per tree.
    PerTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Fraction of attributes considered per split (or per tree).
    pub attr_fraction: f64,
    pub bootstrap: bool,
    /// Minimum samples per leaf; 1 grows trees until pure.
    pub min_leaf: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub attr_sampling: AttrSampling,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 130,
            attr_fraction: 0.8,
            bootstrap: true,
            min_leaf: 1,
            rng_seed: 0,
            attr_sampling: AttrSampling::PerNode,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::InvalidConfig(
                "n_trees must be at least 1".into(),
            ));
        }
        if !(self.attr_fraction > 0.0 && self.attr_fraction <= 1.0) {
            return Err(ForestError::InvalidConfig(format!(
                "attr_fraction must lie in (0, 1], got {}",
                self.attr_fraction
            )));
        }
        if self.min_leaf == 0 {
            return Err(ForestError::InvalidConfig(
                "min_leaf must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Labelled rows with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
    ) -> Result<Self, ForestError> {
        if rows.len() != labels.len() {
            return Err(ForestError::InvalidData(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != feature_names.len() {
                return Err(ForestError::DimensionMismatch {
                    expected: feature_names.len(),
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(ForestError::InvalidData(format!(
                    "row {i} has non-finite values"
                )));
            }
        }
        Ok(Self {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn from_feature_vectors(vectors: &[FeatureVector]) -> Result<Self, ForestError> {
        Self::new(
            feature_names().to_vec(),
            vectors.iter().map(|v| v.values.clone()).collect(),
            vectors.iter().map(|v| v.meta.subject_id.clone()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted distinct labels.
    pub fn label_set(&self) -> Vec<String> {
        self.labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// Vote tally for one prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub label: String,
    pub class: usize,
    /// Votes per class, in label-set order.
    pub votes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    labels: Vec<String>,
    config: ForestConfig,
    feature_names: Vec<String>,
}

fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64);
    rng
}

struct Prepared {
    labels: Vec<String>,
    classes: Vec<usize>,
}

fn prepare(data: &Dataset, config: &ForestConfig) -> Result<Prepared, ForestError> {
    config.validate()?;
    if data.is_empty() {
        return Err(ForestError::EmptyData);
    }
    if data.feature_names.is_empty() {
        return Err(ForestError::InvalidData("no features".into()));
    }
    let labels = data.label_set();
    let classes = data
        .labels
        .iter()
        .map(|l| labels.binary_search(l).expect("label from set"))
        .collect();
    Ok(Prepared { labels, classes })
}

fn train_one(data: &Dataset, prep: &Prepared, config: &ForestConfig, index: usize) -> Tree {
    let set = TrainSet {
        rows: &data.rows,
        classes: &prep.classes,
        n_classes: prep.labels.len(),
        n_features: data.feature_names.len(),
    };
    let mut rng = tree_rng(config.rng_seed, index);
    let n = data.len();
    let idx: Vec<usize> = if config.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    grow_tree(&set, idx, config, &mut rng)
}

/// Grows a single tree using the stream of tree 0.
pub fn train_tree(data: &Dataset, config: &ForestConfig) -> Result<Tree, ForestError> {
    let prep = prepare(data, config)?;
    Ok(train_one(data, &prep, config, 0))
}

impl Forest {
    pub fn train(data: &Dataset, config: &ForestConfig) -> Result<Self, ForestError> {
        let prep = prepare(data, config)?;
        let trees = (0..config.n_trees)
            .map(|i| train_one(data, &prep, config, i))
            .collect();
        Ok(Self::assemble(trees, prep, config, data))
    }

    /// Same result as [`Forest::train`], with trees grown on the current
    /// rayon pool.
    pub fn train_parallel(data: &Dataset, config: &ForestConfig) -> Result<Self, ForestError> {
        let prep = prepare(data, config)?;
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|i| train_one(data, &prep, config, i))
            .collect();
        Ok(Self::assemble(trees, prep, config, data))
    }

    fn assemble(trees: Vec<Tree>, prep: Prepared, config: &ForestConfig, data: &Dataset) -> Self {
        Self {
            trees,
            labels: prep.labels,
            config: config.clone(),
            feature_names: data.feature_names.clone(),
        }
    }

    /// Assembles a forest from explicit trees, checking consistency.
    pub fn from_parts(
        trees: Vec<Tree>,
        labels: Vec<String>,
        config: ForestConfig,
        feature_names: Vec<String>,
    ) -> Result<Self, ForestError> {
        let forest = Self {
            trees,
            labels,
            config,
            feature_names,
        };
        forest.validate()?;
        Ok(forest)
    }

    fn validate(&self) -> Result<(), ForestError> {
        if self.trees.is_empty() {
            return Err(ForestError::Format("forest has no trees".into()));
        }
        if self.labels.is_empty() {
            return Err(ForestError::Format("empty label set".into()));
        }
        if self.labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ForestError::Format(
                "label set must be sorted and distinct".into(),
            ));
        }
        for (i, t) in self.trees.iter().enumerate() {
            t.validate(self.feature_names.len(), self.labels.len())
                .map_err(|e| ForestError::Format(format!("tree {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    /// Per-class vote counts; they always sum to the number of trees.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>, ForestError> {
        if x.len() != self.feature_names.len() {
            return Err(ForestError::DimensionMismatch {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        let mut votes = vec![0; self.labels.len()];
        for t in &self.trees {
            votes[t.predict_class(x)] += 1;
        }
        Ok(votes)
    }

    /// Majority vote; ties go to the earliest label in the label set.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, ForestError> {
        let votes = self.votes(x)?;
        Ok(self.tally(votes))
    }

    pub fn predict_vector(&self, fv: &FeatureVector) -> Result<Prediction, ForestError> {
        self.predict(&fv.values)
    }

    /// Turns an arbitrary vote vector (for example summed over windows) into
    /// a prediction using the same tie rule.
    pub fn tally(&self, votes: Vec<usize>) -> Prediction {
        let mut class = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[class] {
                class = c;
            }
        }
        Prediction {
            label: self.labels[class].clone(),
            class,
            votes,
        }
    }

    /// Total split counts per feature across all trees, most used first;
    /// ties keep feature order.
    pub fn feature_importance(&self) -> Vec<(String, u64)> {
        let mut totals = vec![0u64; self.feature_names.len()];
        for t in &self.trees {
            for (acc, &c) in totals.iter_mut().zip(t.split_counts()) {
                *acc += u64::from(c);
            }
        }
        let mut ranked: Vec<(String, u64)> =
            self.feature_names.iter().cloned().zip(totals).collect();
        ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
        ranked
    }

    // -----------------------------------------------------------------------
    // Persistence

    pub fn to_json(&self) -> String {
        let file = ModelFileRef {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            forest: self,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("forest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ForestError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ForestError::Format(e.to_string()))?;
        match value.get("format").and_then(Value::as_str) {
            Some(MODEL_FORMAT) => {}
            Some(other) => return Err(ForestError::Format(format!("unknown format '{other}'"))),
            None => return Err(ForestError::Format("missing 'format' field".into())),
        }
        let version = value
            .get("version")
            .and_then(Value::as_u64)
            .ok_or_else(|| ForestError::Format("missing 'version' field".into()))?;
        if version != MODEL_VERSION {
            return Err(ForestError::Version {
                found: version,
                expected: MODEL_VERSION,
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| ForestError::Format(e.to_string()))?;
        file.forest.validate()?;
        Ok(file.forest)
    }

    pub fn save(&self, path: &Path) -> Result<(), ForestError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| ForestError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ForestError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ForestError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

pub const MODEL_FORMAT: &str = "tremor-id-forest";
pub const MODEL_VERSION: u64 = 1;

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'static str,
    version: u64,
    #[serde(flatten)]
    forest: &'a Forest,
}

#[derive(Deserialize)]
struct ModelFile {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u64,
    #[serde(flatten)]
    forest: Forest,
}
