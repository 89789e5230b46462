use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AttrSampling, ForestConfig, ForestError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Samples with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

/// A binary decision tree stored as a flat node array, root first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    split_counts: Vec<u32>,
}

impl Tree {
    pub fn leaf(class: usize, n_features: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf { class }],
            split_counts: vec![0; n_features],
        }
    }

    /// Builds a tree from explicit nodes, recomputing split counts.
    pub fn from_nodes(
        nodes: Vec<Node>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self, ForestError> {
        let mut split_counts = vec![0; n_features];
        for n in &nodes {
            if let Node::Split { feature, .. } = n {
                if *feature < n_features {
                    split_counts[*feature] += 1;
                }
            }
        }
        let tree = Self {
            nodes,
            split_counts,
        };
        tree.validate(n_features, n_classes)?;
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn split_counts(&self) -> &[u32] {
        &self.split_counts
    }

    pub fn predict_class(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    /// Children must point forward so that routing always terminates, every
    /// node must be reachable exactly once, and split counts must agree with
    /// the nodes.
    pub(crate) fn validate(&self, n_features: usize, n_classes: usize) -> Result<(), ForestError> {
        let bad = |m: String| Err(ForestError::Format(m));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        if self.split_counts.len() != n_features {
            return bad(format!(
                "split_counts has {} entries, expected {n_features}",
                self.split_counts.len()
            ));
        }
        let mut counts = vec![0u32; n_features];
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { class } if class >= n_classes => {
                    return bad(format!("node {i}: class {class} out of range"))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return bad(format!("node {i}: feature {feature} out of range"));
                    }
                    if !threshold.is_finite() {
                        return bad(format!("node {i}: non-finite threshold"));
                    }
                    for c in [left, right] {
                        if c <= i || c >= self.nodes.len() {
                            return bad(format!("node {i}: child index {c} invalid"));
                        }
                        parents[c] += 1;
                    }
                    counts[feature] += 1;
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return bad("node graph is not a tree".into());
        }
        if counts != self.split_counts {
            return bad("split_counts disagree with nodes".into());
        }
        Ok(())
    }
}

/// Training view: borrowed rows with dense class indices.
pub(crate) struct TrainSet<'a> {
    pub rows: &'a [Vec<f64>],
    pub classes: &'a [usize],
    pub n_classes: usize,
    pub n_features: usize,
}

pub(crate) fn candidate_count(config: &ForestConfig, n_features: usize) -> usize {
    ((config.attr_fraction * n_features as f64).ceil() as usize).clamp(1, n_features)
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Best Gini split on one feature. Maximising `Σ l_c²/n_l + Σ r_c²/n_r` is
/// equivalent to minimising the size-weighted Gini impurity of the children;
/// the sums of squared counts are tracked exactly in integers.
fn best_split_on(
    set: &TrainSet<'_>,
    idx: &[usize],
    feature: usize,
    min_leaf: usize,
    buf: &mut Vec<(f64, usize)>,
    left: &mut [usize],
    right: &mut [usize],
) -> Option<(f64, f64)> {
    buf.clear();
    buf.extend(idx.iter().map(|&i| (set.rows[i][feature], set.classes[i])));
    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    if buf[0].0 == buf[buf.len() - 1].0 {
        return None;
    }
    left.fill(0);
    right.fill(0);
    for &(_, c) in buf.iter() {
        right[c] += 1;
    }
    let mut sq_left: u64 = 0;
    let mut sq_right: u64 = right.iter().map(|&r| (r * r) as u64).sum();
    let n = buf.len();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        let c = buf[i].1;
        sq_left += (2 * left[c] + 1) as u64;
        sq_right -= (2 * right[c] - 1) as u64;
        left[c] += 1;
        right[c] -= 1;
        let (a, b) = (buf[i].0, buf[i + 1].0);
        let n_left = i + 1;
        if a == b || n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let score = sq_left as f64 / n_left as f64 + sq_right as f64 / (n - n_left) as f64;
        if best.is_none_or(|(s, _)| score > s) {
            let mid = a + (b - a) / 2.0;
            let threshold = if mid >= a && mid < b { mid } else { a };
            best = Some((score, threshold));
        }
    }
    best
}

fn best_split(
    set: &TrainSet<'_>,
    idx: &[usize],
    features: impl Iterator<Item = usize>,
    min_leaf: usize,
    scratch: &mut Scratch,
) -> Option<Split> {
    let mut best: Option<Split> = None;
    for f in features {
        if let Some((score, threshold)) = best_split_on(
            set,
            idx,
            f,
            min_leaf,
            &mut scratch.pairs,
            &mut scratch.left,
            &mut scratch.right,
        ) {
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Split {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

struct Scratch {
    pairs: Vec<(f64, usize)>,
    left: Vec<usize>,
    right: Vec<usize>,
}

/// Grows one tree on `sample_idx` (which may contain repeats).
pub(crate) fn grow_tree<R: Rng>(
    set: &TrainSet<'_>,
    sample_idx: Vec<usize>,
    config: &ForestConfig,
    rng: &mut R,
) -> Tree {
    let d = set.n_features;
    let k = candidate_count(config, d);
    let tree_features: Option<Vec<usize>> = match config.attr_sampling {
        AttrSampling::PerTree => {
            let mut f = sample(rng, d, k).into_vec();
            f.sort_unstable();
            Some(f)
        }
        AttrSampling::PerNode => None,
    };

    let mut scratch = Scratch {
        pairs: Vec::with_capacity(sample_idx.len()),
        left: vec![0; set.n_classes],
        right: vec![0; set.n_classes],
    };
    let mut nodes = vec![Node::Leaf { class: 0 }];
    let mut split_counts = vec![0u32; d];
    let mut stack = vec![(0usize, sample_idx)];
    let mut in_candidates = vec![false; d];

    while let Some((slot, idx)) = stack.pop() {
        let mut counts = vec![0usize; set.n_classes];
        for &i in &idx {
            counts[set.classes[i]] += 1;
        }
        let majority_class = majority(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || idx.len() < 2 * config.min_leaf {
            nodes[slot] = Node::Leaf {
                class: majority_class,
            };
            continue;
        }

        let split = match &tree_features {
            Some(f) => best_split(set, &idx, f.iter().copied(), config.min_leaf, &mut scratch),
            None => {
                let mut cand = sample(rng, d, k).into_vec();
                cand.sort_unstable();
                let found = best_split(
                    set,
                    &idx,
                    cand.iter().copied(),
                    config.min_leaf,
                    &mut scratch,
                );
                if found.is_some() || k == d {
                    found
                } else {
                    // Every drawn feature is constant here; keep looking among
                    // the rest so trees still grow until pure.
                    for &f in &cand {
                        in_candidates[f] = true;
                    }
                    let rest = (0..d).filter(|f| !in_candidates[*f]);
                    let found = best_split(set, &idx, rest, config.min_leaf, &mut scratch);
                    for &f in &cand {
                        in_candidates[f] = false;
                    }
                    found
                }
            }
        };

        let Some(split) = split else {
            nodes[slot] = Node::Leaf {
                class: majority_class,
            };
            continue;
        };
        let (li, ri): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| set.rows[i][split.feature] <= split.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { class: 0 });
        nodes.push(Node::Leaf { class: 0 });
        nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        split_counts[split.feature] += 1;
        stack.push((right, ri));
        stack.push((left, li));
    }
    Tree {
        nodes,
        split_counts,
    }
}
