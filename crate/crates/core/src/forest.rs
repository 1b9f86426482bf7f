//! Random forest classifier: bootstrap-bagged CART trees with Gini splits
//! and `floor(sqrt(m))` candidate features per node, combined by majority
//! vote.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Rng};
use crate::NUM_CLASSES;

pub const MODEL_FORMAT: &str = "gaze-topo-forest";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
    /// Train each tree on a bootstrap resample. Turning this off trains
    /// every tree on the full set.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidArgument(
                "min_samples_split must be >= 2".into(),
            ));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Gini impurity `1 - sum_c p_c^2` of a label list.
pub fn gini(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("gini of an empty label list".into()));
    }
    let mut counts = [0usize; NUM_CLASSES];
    for &l in labels {
        *counts
            .get_mut(l as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("label {l} out of range")))? += 1;
    }
    Ok(gini_counts(&counts, labels.len()))
}

fn gini_counts(counts: &[usize; NUM_CLASSES], n: usize) -> f64 {
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Index of the largest count; ties go to the lowest index.
fn majority(counts: &[usize; NUM_CLASSES]) -> u8 {
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best as u8
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    /// Samples with `x[feature] <= threshold` go to the next node in the
    /// list; the rest go to `right`.
    Split {
        feature: usize,
        threshold: f64,
        right: usize,
    },
    Leaf(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Serialized form of a node in a preorder list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRecord {
    Split { feature: usize, threshold: f64 },
    Leaf { leaf: u8 },
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(label) => return label,
                Node::Split {
                    feature,
                    threshold,
                    right,
                } => {
                    i = if x[feature] <= threshold {
                        i + 1
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], i: usize) -> (usize, usize) {
            match nodes[i] {
                Node::Leaf(_) => (0, i + 1),
                Node::Split { right, .. } => {
                    let (l, _) = rec(nodes, i + 1);
                    let (r, end) = rec(nodes, right);
                    (1 + l.max(r), end)
                }
            }
        }
        rec(&self.nodes, 0).0
    }

    /// `(feature, threshold)` of every split, in preorder.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Split {
                    feature, threshold, ..
                } => Some((feature, threshold)),
                Node::Leaf(_) => None,
            })
            .collect()
    }

    fn to_records(&self) -> Vec<NodeRecord> {
        self.nodes
            .iter()
            .map(|n| match *n {
                Node::Split {
                    feature, threshold, ..
                } => NodeRecord::Split { feature, threshold },
                Node::Leaf(leaf) => NodeRecord::Leaf { leaf },
            })
            .collect()
    }

    fn from_records(records: &[NodeRecord], feature_count: usize) -> Result<Self> {
        // Returns the index one past the subtree rooted at `i`.
        fn rec(records: &[NodeRecord], i: usize, m: usize, nodes: &mut Vec<Node>) -> Result<usize> {
            let record = records
                .get(i)
                .ok_or_else(|| Error::Model("truncated preorder node list".into()))?;
            match *record {
                NodeRecord::Leaf { leaf } => {
                    if leaf as usize >= NUM_CLASSES {
                        return Err(Error::Model(format!("leaf label {leaf} out of range")));
                    }
                    nodes[i] = Node::Leaf(leaf);
                    Ok(i + 1)
                }
                NodeRecord::Split { feature, threshold } => {
                    if feature >= m {
                        return Err(Error::Model(format!(
                            "split feature {feature} >= feature count {m}"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::Model("non-finite split threshold".into()));
                    }
                    let right = rec(records, i + 1, m, nodes)?;
                    let end = rec(records, right, m, nodes)?;
                    nodes[i] = Node::Split {
                        feature,
                        threshold,
                        right,
                    };
                    Ok(end)
                }
            }
        }
        let mut nodes = vec![Node::Leaf(0); records.len()];
        let end = rec(records, 0, feature_count, &mut nodes)?;
        if end != records.len() {
            return Err(Error::Model("trailing nodes after tree".into()));
        }
        Ok(Self { nodes })
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    max_features: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
    nodes: Vec<Node>,
    // reused per node
    order: Vec<(f64, u8)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn build(&mut self, indices: &mut [usize], depth: usize, rng: &mut Rng) {
        let mut counts = [0usize; NUM_CLASSES];
        for &i in indices.iter() {
            counts[self.y[i] as usize] += 1;
        }
        let n = indices.len();
        let impurity = gini_counts(&counts, n);
        let at_depth_limit = self.max_depth.is_some_and(|d| depth >= d);
        if impurity == 0.0 || n < self.min_samples_split || at_depth_limit {
            self.nodes.push(Node::Leaf(majority(&counts)));
            return;
        }
        let best = self.best_split(indices, rng);
        let Some(best) = best.filter(|b| b.impurity < impurity) else {
            self.nodes.push(Node::Leaf(majority(&counts)));
            return;
        };

        // partition: left = x <= threshold
        let mut split = 0;
        for k in 0..n {
            if self.x[indices[k]][best.feature] <= best.threshold {
                indices.swap(k, split);
                split += 1;
            }
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            right: 0,
        });
        let (left, right) = indices.split_at_mut(split);
        self.build(left, depth + 1, rng);
        let right_at = self.nodes.len();
        if let Node::Split { right: r, .. } = &mut self.nodes[at] {
            *r = right_at;
        }
        self.build(right, depth + 1, rng);
    }

    /// Features are visited in random order until `max_features` of them
    /// with at least two distinct values have been scored.
    fn best_split(&mut self, indices: &[usize], rng: &mut Rng) -> Option<BestSplit> {
        let m = self.x[indices[0]].len();
        let mut features: Vec<usize> = (0..m).collect();
        let mut scored = 0;
        let mut best: Option<BestSplit> = None;
        let n = indices.len();
        for k in 0..m {
            if scored == self.max_features {
                break;
            }
            let j = rng.gen_range(k..m);
            features.swap(k, j);
            let f = features[k];

            self.order.clear();
            self.order
                .extend(indices.iter().map(|&i| (self.x[i][f], self.y[i])));
            self.order.sort_by(|a, b| a.0.total_cmp(&b.0));
            if self.order[0].0 == self.order[n - 1].0 {
                continue;
            }
            scored += 1;

            let mut total = [0usize; NUM_CLASSES];
            for &(_, l) in &self.order {
                total[l as usize] += 1;
            }
            let mut left = [0usize; NUM_CLASSES];
            for s in 0..n - 1 {
                let (v, l) = self.order[s];
                left[l as usize] += 1;
                let next = self.order[s + 1].0;
                if v == next {
                    continue;
                }
                let nl = s + 1;
                let nr = n - nl;
                let mut right = total;
                for c in 0..NUM_CLASSES {
                    right[c] -= left[c];
                }
                let weighted = (nl as f64 * gini_counts(&left, nl)
                    + nr as f64 * gini_counts(&right, nr))
                    / n as f64;
                if best.as_ref().is_none_or(|b| weighted < b.impurity) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity: weighted,
                    });
                }
            }
        }
        best
    }
}

fn check_training_set(x: &[Vec<f64>], y: &[u8]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let m = x[0].len();
    if m == 0 {
        return Err(Error::InvalidArgument("rows have no features".into()));
    }
    for row in x {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
    }
    if let Some(&l) = y.iter().find(|&&l| l as usize >= NUM_CLASSES) {
        return Err(Error::InvalidArgument(format!(
            "label {l} outside 0..{NUM_CLASSES}"
        )));
    }
    Ok(m)
}

/// Candidate features per node, `floor(sqrt(m))` but at least one.
pub fn max_features(m: usize) -> usize {
    ((m as f64).sqrt().floor() as usize).max(1)
}

/// Grow one tree on the rows listed in `sample` (repeats allowed).
pub fn train_tree(
    x: &[Vec<f64>],
    y: &[u8],
    sample: &[usize],
    rng: &mut Rng,
    config: &ForestConfig,
) -> Result<DecisionTree> {
    let m = check_training_set(x, y)?;
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty training sample".into()));
    }
    let mut builder = TreeBuilder {
        x,
        y,
        max_features: max_features(m),
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        nodes: Vec::new(),
        order: Vec::with_capacity(sample.len()),
    };
    let mut indices = sample.to_vec();
    builder.build(&mut indices, 0, rng);
    Ok(DecisionTree {
        nodes: builder.nodes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub feature_count: usize,
    pub trees: Vec<DecisionTree>,
}

/// Train `config.n_trees` trees. Tree `t` draws from its own generator
/// seeded by `(config.seed, t)`, so the result does not depend on how trees
/// are scheduled across threads.
pub fn train_forest(x: &[Vec<f64>], y: &[u8], config: &ForestConfig) -> Result<ForestModel> {
    config.validate()?;
    let m = check_training_set(x, y)?;
    let n = x.len();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive(config.seed, t as u64));
            let sample: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            train_tree(x, y, &sample, &mut rng, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        config: config.clone(),
        feature_count: m,
        trees,
    })
}

/// Most frequent vote; ties go to the lowest class index.
pub fn majority_vote(votes: impl IntoIterator<Item = u8>) -> u8 {
    let mut counts = [0usize; NUM_CLASSES];
    for v in votes {
        counts[v as usize] += 1;
    }
    majority(&counts)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: ForestConfig,
    feature_count: usize,
    trees: Vec<Vec<NodeRecord>>,
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        if x.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        Ok(majority_vote(self.trees.iter().map(|t| t.predict(x))))
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    /// How often each feature is used as a split, summed over all trees.
    pub fn split_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.feature_count];
        for tree in &self.trees {
            for (f, _) in tree.splits() {
                counts[f] += 1;
            }
        }
        counts
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: self.config.clone(),
            feature_count: self.feature_count,
            trees: self.trees.iter().map(DecisionTree::to_records).collect(),
        };
        Ok(serde_json::to_string(&file)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unknown format `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported version {}",
                file.version
            )));
        }
        if file.feature_count == 0 {
            return Err(Error::Model("feature count must be positive".into()));
        }
        if file.trees.is_empty() {
            return Err(Error::Model("model has no trees".into()));
        }
        file.config.validate()?;
        let trees = file
            .trees
            .iter()
            .map(|t| DecisionTree::from_records(t, file.feature_count))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: file.config,
            feature_count: file.feature_count,
            trees,
        })
    }
}
